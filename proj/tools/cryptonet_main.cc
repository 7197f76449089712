// Copyright 2026 The Cryptonet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry points. Exit status: 0 on success, 1 when an input
// fails validation, 2 on I/O or protocol failures.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cryptonet/approx.h"
#include "cryptonet/encode.h"
#include "cryptonet/infer.h"
#include "cryptonet/json_io.h"
#include "cryptonet/polynet.h"
#include "cryptonet/protocol.h"
#include "cryptonet/she.h"
#include "cryptonet/train.h"
#include "cryptonet/wire.h"

namespace fs = std::filesystem;
using cryptonet::CompiledCircuit;
using cryptonet::SchemeParams;

namespace {

constexpr int kValidationFailure = 1;
constexpr int kIoFailure = 2;

uint64_t seed_or_random(const std::optional<uint64_t>& seed) {
  return seed ? *seed : cryptonet::os_random_seed();
}

SchemeParams load_params(const fs::path& path) {
  return cryptonet::params_from_json(cryptonet::read_json_file(path));
}

CompiledCircuit load_circuit(const fs::path& path) {
  return cryptonet::circuit_from_json(cryptonet::read_json_file(path));
}

// Rows of numbers; a non-numeric first line is taken as a header.
std::vector<std::vector<double>> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cryptonet::IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  for (size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (line_no == 1) continue;
      throw cryptonet::ValidationError(path.string() + ":" + std::to_string(line_no) +
                                       ": not numeric");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw cryptonet::ValidationError(path.string() + ": no rows");
  return rows;
}

void print_row(const std::vector<double>& v) {
  for (size_t i = 0; i < v.size(); ++i) std::printf("%s%.17g", i ? "," : "", v[i]);
  std::printf("\n");
}

void output_json(const std::string& out, const nlohmann::json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    cryptonet::write_json_file(out, j);
  }
}

int guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const cryptonet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const cryptonet::ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const cryptonet::WireFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == cryptonet::WireErrorCode::kParamsMismatch ? kValidationFailure
                                                                 : kIoFailure;
  } catch (const cryptonet::Error& e) {
    // Validation, params, scale, depth, overflow and training failures.
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural network inference on homomorphically encrypted data"};
  app.require_subcommand(1);
  std::function<void()> action;

  // params gen
  auto* params_cmd = app.add_subcommand("params", "Scheme parameters");
  params_cmd->require_subcommand(1);
  auto* gen = params_cmd->add_subcommand("gen", "Generate scheme parameters");
  size_t pg_n = 2048;
  int pg_logq = 54;
  uint64_t pg_t = 65536;
  std::optional<int> pg_depth;
  double pg_stddev = SchemeParams::kDefaultNoiseStddev;
  uint64_t pg_base = SchemeParams::kDefaultDecompBase;
  std::string pg_out;
  gen->add_option("--n", pg_n, "Ring dimension (power of two)")->capture_default_str();
  gen->add_option("--logq", pg_logq, "Bit length of q (at most 116)")->capture_default_str();
  gen->add_option("--t", pg_t, "Plaintext modulus")->capture_default_str();
  gen->add_option("--depth", pg_depth, "Multiplicative depth (default: largest supported)");
  gen->add_option("--stddev", pg_stddev, "Error standard deviation")->capture_default_str();
  gen->add_option("--base", pg_base, "Relinearization digit base")->capture_default_str();
  gen->add_option("-o,--output", pg_out, "Output file (default: stdout)");
  gen->callback([&] {
    action = [&] {
      const SchemeParams p = SchemeParams::generate(pg_n, pg_logq, pg_t, pg_depth, pg_stddev, pg_base);
      output_json(pg_out, cryptonet::params_to_json(p));
      std::cerr << "params " << cryptonet::params_id_hex(p.id()).substr(0, 16) << " depth "
                << p.max_mul_depth() << "\n";
    };
  });

  // keygen
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate secret and evaluation keys");
  std::string kg_params, kg_out, kg_evk;
  std::optional<uint64_t> kg_seed;
  keygen_cmd->add_option("--params", kg_params, "Params or circuit JSON")->required();
  keygen_cmd->add_option("-o,--output", kg_out, "Secret key file (mode 600)")->required();
  keygen_cmd->add_option("--evk", kg_evk, "Evaluation key file (default: <output>.evk)");
  keygen_cmd->add_option("--seed", kg_seed, "Seed (default: operating system entropy)");
  keygen_cmd->callback([&] {
    action = [&] {
      nlohmann::json j = cryptonet::read_json_file(kg_params);
      // Accept a circuit file too, whose params may have a raised t.
      const SchemeParams p = cryptonet::params_from_json(j.contains("params") ? j["params"] : j);
      cryptonet::Prng rng(seed_or_random(kg_seed));
      const cryptonet::SecretKeyBundle keys = cryptonet::keygen(p, rng);
      cryptonet::write_file(kg_out, cryptonet::encode_secret_keys(keys), true);
      const fs::path evk = kg_evk.empty() ? fs::path(kg_out).replace_extension(".evk") : fs::path(kg_evk);
      cryptonet::write_file(evk, cryptonet::encode_evaluation_keys(keys.eval_keys));
      std::cerr << "wrote " << kg_out << " and " << evk.string() << "\n";
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a polynomial network in plaintext");
  std::string tr_data, tr_arch, tr_out;
  int tr_epochs = 200;
  double tr_lr = 0.05;
  uint64_t tr_seed = 5;
  bool tr_exact = false;
  train_cmd->add_option("--data", tr_data, "CSV: features then targets or a class index")->required();
  train_cmd->add_option("--arch", tr_arch, "Architecture or model JSON")->required();
  train_cmd->add_option("--epochs", tr_epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr_lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--seed", tr_seed, "Weight initialization seed")->capture_default_str();
  train_cmd->add_flag("--exact", tr_exact, "Train with the exact activations");
  train_cmd->add_option("-o,--output", tr_out, "Model JSON")->required();
  train_cmd->callback([&] {
    action = [&] {
      cryptonet::Prng rng(tr_seed);
      cryptonet::PolyNetwork net = cryptonet::network_from_json(cryptonet::read_json_file(tr_arch), &rng);
      const cryptonet::Dataset data = cryptonet::load_csv(tr_data, net.input_dim, net.output_dim());
      cryptonet::TrainConfig cfg;
      cfg.learning_rate = tr_lr;
      cfg.epochs = tr_epochs;
      cfg.mode = tr_exact ? cryptonet::ActivationMode::kExact : cryptonet::ActivationMode::kPolynomial;
      const cryptonet::TrainResult r = cryptonet::train(std::move(net), data, cfg);
      cryptonet::write_json_file(tr_out, cryptonet::network_to_json(r.net));
      std::printf("loss %.6g accuracy %.4f\n", cryptonet::l2_loss(r.net, data, cfg.mode),
                  cryptonet::accuracy(r.net, data, cfg.mode));
    };
  });

  // approx
  auto* approx_cmd = app.add_subcommand("approx", "Polynomial approximation error by degree");
  std::string ap_fn = "sigmoid";
  std::vector<double> ap_interval;
  int ap_max_degree = 16;
  int ap_grid = cryptonet::kDefaultGridPoints;
  approx_cmd->add_option("--fn", ap_fn, "sigmoid, tanh, relu, square or identity")->capture_default_str();
  approx_cmd->add_option("--interval", ap_interval, "Lower and upper end")->expected(2);
  approx_cmd->add_option("--max-degree", ap_max_degree)->capture_default_str();
  approx_cmd->add_option("--grid", ap_grid, "Grid points for the error estimate")->capture_default_str();
  approx_cmd->callback([&] {
    action = [&] {
      const cryptonet::ActivationKind kind = cryptonet::parse_activation_kind(ap_fn);
      const cryptonet::ActivationSpec spec =
          ap_interval.empty() ? cryptonet::ActivationSpec(kind)
                              : cryptonet::ActivationSpec(kind, ap_interval[0], ap_interval[1]);
      std::printf("# %s on [%g, %g]\n", ap_fn.c_str(), spec.a(), spec.b());
      std::printf("degree,chebyshev_error,minimax_error\n");
      for (const auto& row : cryptonet::approximation_table(spec, ap_max_degree, ap_grid)) {
        std::printf("%d,%.6e,%.6e\n", row.degree, row.chebyshev_error, row.minimax_error);
      }
    };
  });

  // compile
  auto* compile_cmd = app.add_subcommand("compile", "Compile a model to a circuit and check it fits");
  std::string cp_model, cp_params, cp_out;
  cryptonet::CompileConfig cp_config;
  bool cp_no_raise = false;
  compile_cmd->add_option("--model", cp_model, "Model JSON")->required();
  compile_cmd->add_option("--params", cp_params, "Params JSON")->required();
  compile_cmd->add_option("-o,--output", cp_out, "Circuit JSON")->required();
  compile_cmd->add_option("--input-scale", cp_config.input_scale)->capture_default_str();
  compile_cmd->add_option("--weight-scale", cp_config.weight_scale)->capture_default_str();
  compile_cmd->add_option("--coeff-scale", cp_config.coeff_scale)->capture_default_str();
  compile_cmd->add_flag("--encrypt-constants", cp_config.encrypt_constants,
                        "Bias and coefficients become trivial ciphertexts");
  compile_cmd->add_flag("--no-raise-t", cp_no_raise, "Fail instead of raising t");
  compile_cmd->callback([&] {
    action = [&] {
      cp_config.auto_raise_t = !cp_no_raise;
      const cryptonet::PolyNetwork net = cryptonet::network_from_json(cryptonet::read_json_file(cp_model));
      for (const std::string& w : net.warnings()) std::cerr << "warning: " << w << "\n";
      const SchemeParams params = load_params(cp_params);
      const CompiledCircuit c = cryptonet::compile(net, params, cp_config);
      const cryptonet::BudgetReport r = cryptonet::validate_budget(c, c.params);
      cryptonet::write_json_file(cp_out, cryptonet::circuit_to_json(c));
      if (c.params != params) {
        std::cerr << "note: t raised to " << c.params.t()
                  << "; generate keys from the circuit file\n";
      }
      std::printf("nodes %zu degree %d depth %d/%d magnitude margin %.2f bits noise margin %.2f bits\n",
                  c.nodes.size(), c.total_degree, c.mul_depth, c.params.max_mul_depth(),
                  r.magnitude_margin_bits, r.noise_margin_bits);
    };
  });

  // encrypt
  auto* encrypt_cmd = app.add_subcommand("encrypt", "Encrypt feature rows");
  std::string en_keys, en_params, en_input, en_out, en_scale_from;
  int en_scale = 6;
  std::optional<uint64_t> en_seed;
  encrypt_cmd->add_option("--keys", en_keys, "Secret key file")->required();
  encrypt_cmd->add_option("--params", en_params, "Params JSON (or use --scale-from)");
  encrypt_cmd->add_option("--scale-from", en_scale_from, "Circuit JSON giving params and input scales");
  encrypt_cmd->add_option("--scale", en_scale, "Fixed-point scale without a circuit")->capture_default_str();
  encrypt_cmd->add_option("--input", en_input, "CSV, one row per sample")->required();
  encrypt_cmd->add_option("-o,--output", en_out, "Ciphertext file")->required();
  encrypt_cmd->add_option("--seed", en_seed, "Seed (default: operating system entropy)");
  encrypt_cmd->callback([&] {
    action = [&] {
      if (en_params.empty() == en_scale_from.empty()) {
        throw cryptonet::ValidationError("give exactly one of --params and --scale-from");
      }
      const std::vector<std::vector<double>> rows = read_rows(en_input);
      cryptonet::Prng rng(seed_or_random(en_seed));
      std::vector<cryptonet::Ciphertext> cts;
      if (!en_scale_from.empty()) {
        const CompiledCircuit c = load_circuit(en_scale_from);
        const cryptonet::SecretKeyBundle keys = cryptonet::decode_secret_keys(cryptonet::read_file(en_keys), c.params);
        for (const auto& row : rows) {
          // Extra columns (labels) are ignored.
          if (row.size() < c.num_inputs()) throw cryptonet::ValidationError("row has too few features");
          const std::vector<double> x(row.begin(), row.begin() + static_cast<long>(c.num_inputs()));
          std::vector<std::string> warnings;
          for (auto& ct : cryptonet::encrypt_inputs(c, x, keys, rng, &warnings)) cts.push_back(std::move(ct));
          for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
        }
        cryptonet::write_file(en_out, cryptonet::encode_ciphertext_file(cts, c.params));
      } else {
        const SchemeParams p = load_params(en_params);
        const cryptonet::SecretKeyBundle keys = cryptonet::decode_secret_keys(cryptonet::read_file(en_keys), p);
        for (const auto& row : rows) {
          for (double x : row) {
            const cryptonet::FixedPointValue v = cryptonet::encode_real(x, en_scale, p.t());
            cts.push_back(cryptonet::encrypt({v.mantissa}, keys, rng));
          }
        }
        cryptonet::write_file(en_out, cryptonet::encode_ciphertext_file(cts, p));
      }
      std::cerr << "encrypted " << cts.size() << " values\n";
    };
  });

  // decrypt
  auto* decrypt_cmd = app.add_subcommand("decrypt", "Decrypt and print decoded values");
  std::string de_keys, de_params, de_input, de_scale_from;
  int de_scale = 6;
  size_t de_columns = 0;
  bool de_inputs = false, de_argmax = false;
  decrypt_cmd->add_option("--keys", de_keys, "Secret key file")->required();
  decrypt_cmd->add_option("--scale-from", de_scale_from, "Circuit JSON giving params and scales");
  decrypt_cmd->add_flag("--inputs", de_inputs, "Decode with the circuit's input scales");
  decrypt_cmd->add_flag("--argmax", de_argmax, "Print the index of the largest value per row");
  decrypt_cmd->add_option("--params", de_params, "Params JSON (with --scale)");
  decrypt_cmd->add_option("--scale", de_scale, "Fixed-point scale without a circuit")->capture_default_str();
  decrypt_cmd->add_option("--columns", de_columns, "Values per printed row without a circuit");
  decrypt_cmd->add_option("--input", de_input, "Ciphertext file")->required();
  decrypt_cmd->callback([&] {
    action = [&] {
      if (de_params.empty() == de_scale_from.empty()) {
        throw cryptonet::ValidationError("give exactly one of --params and --scale-from");
      }
      std::vector<double> values;
      size_t width = 0;
      if (!de_scale_from.empty()) {
        const CompiledCircuit c = load_circuit(de_scale_from);
        const auto keys = cryptonet::decode_secret_keys(cryptonet::read_file(de_keys), c.params);
        const auto cts = cryptonet::decode_ciphertext_file(cryptonet::read_file(de_input), c.params);
        const std::vector<uint64_t> residues = cryptonet::decrypt_outputs(cts, keys);
        width = de_inputs ? c.num_inputs() : c.outputs.size();
        if (residues.size() % width != 0) {
          throw cryptonet::ValidationError("ciphertext count is not a multiple of " + std::to_string(width));
        }
        for (size_t row = 0; row < residues.size(); row += width) {
          const std::span<const uint64_t> r(residues.data() + row, width);
          if (de_inputs) {
            for (size_t i = 0; i < width; ++i) {
              values.push_back(cryptonet::decode_real({r[i], c.input_scale(i)}, c.params.t()));
            }
          } else {
            for (double v : cryptonet::decode_outputs(c, r)) values.push_back(v);
          }
        }
      } else {
        const SchemeParams p = load_params(de_params);
        const auto keys = cryptonet::decode_secret_keys(cryptonet::read_file(de_keys), p);
        const auto cts = cryptonet::decode_ciphertext_file(cryptonet::read_file(de_input), p);
        for (uint64_t r : cryptonet::decrypt_outputs(cts, keys)) {
          values.push_back(cryptonet::decode_real({r, de_scale}, p.t()));
        }
        width = de_columns == 0 ? values.size() : de_columns;
      }
      for (size_t row = 0; row < values.size(); row += width) {
        const std::vector<double> v(values.begin() + static_cast<long>(row),
                                    values.begin() + static_cast<long>(std::min(row + width, values.size())));
        if (de_argmax) {
          std::printf("%zu\n", cryptonet::argmax(v));
        } else {
          print_row(v);
        }
      }
    };
  });

  // eval: the plaintext fixed-point path, for comparison with decrypt.
  auto* eval_cmd = app.add_subcommand("eval", "Run a circuit or model on plaintext rows");
  std::string ev_circuit, ev_model, ev_input;
  bool ev_argmax = false;
  eval_cmd->add_option("--circuit", ev_circuit, "Circuit JSON (bit-exact fixed-point path)");
  eval_cmd->add_option("--model", ev_model, "Model JSON (real-valued path)");
  eval_cmd->add_option("--input", ev_input, "CSV, one row per sample")->required();
  eval_cmd->add_flag("--argmax", ev_argmax, "Print the index of the largest value per row");
  eval_cmd->callback([&] {
    action = [&] {
      if (ev_circuit.empty() == ev_model.empty()) {
        throw cryptonet::ValidationError("give exactly one of --circuit and --model");
      }
      std::optional<CompiledCircuit> c;
      std::optional<cryptonet::PolyNetwork> net;
      if (!ev_circuit.empty()) c = load_circuit(ev_circuit);
      if (!ev_model.empty()) net = cryptonet::network_from_json(cryptonet::read_json_file(ev_model));
      const size_t dim = c ? c->num_inputs() : net->input_dim;
      for (const auto& row : read_rows(ev_input)) {
        if (row.size() < dim) throw cryptonet::ValidationError("row has too few features");
        const std::vector<double> x(row.begin(), row.begin() + static_cast<long>(dim));
        const std::vector<double> y = c ? cryptonet::quantized_forward(*c, x).values
                                        : cryptonet::plain_forward(*net, x);
        if (ev_argmax) {
          std::printf("%zu\n", cryptonet::argmax(y));
        } else {
          print_row(y);
        }
      }
    };
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve encrypted inference");
  std::string sv_registry, sv_listen = "127.0.0.1:7400";
  bool sv_keep_alive = false;
  int sv_timeout = 30000;
  serve_cmd->add_option("--registry", sv_registry, "Registry JSON")->required();
  serve_cmd->add_option("--listen", sv_listen, "host:port (port 0 picks one)")->capture_default_str();
  serve_cmd->add_flag("--keep-alive", sv_keep_alive, "Allow several requests per connection");
  serve_cmd->add_option("--timeout-ms", sv_timeout, "Read timeout")->capture_default_str();
  serve_cmd->callback([&] {
    action = [&] {
      auto registry = std::make_shared<const cryptonet::ModelRegistry>(cryptonet::ModelRegistry::load(sv_registry));
      const cryptonet::Endpoint ep = cryptonet::parse_endpoint(sv_listen);
      cryptonet::ServerOptions opts;
      opts.host = ep.host;
      opts.port = ep.port;
      opts.keep_alive = sv_keep_alive;
      opts.read_timeout_ms = sv_timeout;
      cryptonet::Server server(registry, opts);
      try {
        server.start();
      } catch (const std::runtime_error& e) {
        throw cryptonet::IoError(e.what());
      }
      std::printf("listening on %s:%u (%zu models)\n", ep.host.c_str(), server.port(), registry->size());
      std::fflush(stdout);
      server.wait();
    };
  });

  // request
  auto* request_cmd = app.add_subcommand("request", "Send ciphertexts to a server");
  std::string rq_addr, rq_model, rq_input, rq_out, rq_params;
  size_t rq_batch = 0;
  request_cmd->add_option("--addr", rq_addr, "host:port")->required();
  request_cmd->add_option("--model-id", rq_model)->required();
  request_cmd->add_option("--params", rq_params, "Params or circuit JSON")->required();
  request_cmd->add_option("--input", rq_input, "Ciphertext file")->required();
  request_cmd->add_option("--batch", rq_batch, "Ciphertexts per request (default: all in one)");
  request_cmd->add_option("-o,--output", rq_out, "Output ciphertext file")->required();
  request_cmd->callback([&] {
    action = [&] {
      nlohmann::json j = cryptonet::read_json_file(rq_params);
      const SchemeParams p = cryptonet::params_from_json(j.contains("params") ? j["params"] : j);
      const cryptonet::Endpoint ep = cryptonet::parse_endpoint(rq_addr);
      const auto in = cryptonet::decode_ciphertext_file(cryptonet::read_file(rq_input), p);
      const size_t batch = rq_batch == 0 ? in.size() : rq_batch;
      if (in.empty() || in.size() % batch != 0) {
        throw cryptonet::ValidationError("ciphertext count is not a multiple of --batch");
      }
      std::vector<cryptonet::Ciphertext> out;
      for (size_t i = 0; i < in.size(); i += batch) {
        for (auto& ct : cryptonet::request_inference(ep, rq_model, std::span(in).subspan(i, batch), p)) {
          out.push_back(std::move(ct));
        }
      }
      cryptonet::write_file(rq_out, cryptonet::encode_ciphertext_file(out, p));
      std::cerr << "received " << out.size() << " ciphertexts\n";
    };
  });

  // datagen
  auto* datagen_cmd = app.add_subcommand("datagen", "Write the two-blob demo dataset");
  size_t dg_n = 200;
  uint64_t dg_seed = 11;
  std::string dg_out;
  datagen_cmd->add_option("--n", dg_n, "Samples")->capture_default_str();
  datagen_cmd->add_option("--seed", dg_seed)->capture_default_str();
  datagen_cmd->add_option("-o,--output", dg_out, "CSV: x0,x1,y0,y1")->required();
  datagen_cmd->callback([&] {
    action = [&] { cryptonet::save_csv(dg_out, cryptonet::make_blobs(dg_n, dg_seed)); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kValidationFailure;
  }
  return guarded(action);
}
