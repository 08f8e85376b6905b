#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anex/dsl.hpp"
#include "anex/report.hpp"

namespace {

using anex::Json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw anex::ParseError(1, 1, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void add_diagnostic(Json& report, const std::string& kind,
                    const std::string& message) {
  Json d;
  d["severity"] = "error";
  d["kind"] = kind;
  d["message"] = message;
  report["diagnostics"].push_back(std::move(d));
}

/// Runs a command body, mapping library errors to diagnostics and exit
/// codes (0 success, 1 contract/capability, 2 parse), and writes the report
/// to `out_path` or stdout.
int emit_report(const std::string& command, const std::string& out_path,
                const std::function<void(Json&)>& body) {
  Json report = anex::report_envelope(command);
  int code = 0;
  try {
    body(report);
  } catch (const anex::ParseError& e) {
    Json d;
    d["severity"] = "error";
    d["kind"] = "parse";
    d["line"] = e.line;
    d["column"] = e.column;
    d["message"] = e.what();
    report["diagnostics"].push_back(std::move(d));
    code = 2;
  } catch (const anex::CapabilityError& e) {
    Json d;
    d["severity"] = "error";
    d["kind"] = "capability";
    d["message"] = e.what();
    if (!e.missing.empty()) d["missing"] = e.missing;
    report["diagnostics"].push_back(std::move(d));
    code = 1;
  } catch (const anex::DimensionError& e) {
    add_diagnostic(report, "dimension", e.what());
    code = 1;
  } catch (const anex::ResourceError& e) {
    add_diagnostic(report, "resource", e.what());
    code = 1;
  } catch (const anex::Error& e) {
    add_diagnostic(report, "contract", e.what());
    code = 1;
  } catch (const std::exception& e) {
    add_diagnostic(report, "internal", e.what());
    code = 1;
  }
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      std::fprintf(stderr, "cannot write '%s'\n", out_path.c_str());
      if (code == 0) code = 1;
    }
  }
  return code;
}

anex::CodeKind kind_of(const std::string& name) {
  if (name == "as") return anex::CodeKind::SingleOccupation;
  if (name == "aa") return anex::CodeKind::EqualOccupation;
  throw anex::ContractError("unknown code kind '" + name + "' (expected as|aa)");
}

anex::Encoding encoding_for(const anex::HamiltonianSpec& spec,
                            const std::string& kind, int dense_cap) {
  if (spec.n_qubits % 2 != 0)
    throw anex::ContractError("pair encodings need an even qubit count, got " +
                              std::to_string(spec.n_qubits));
  return anex::make_encoding(kind_of(kind), spec.n_qubits / 2, dense_cap);
}

std::string bits_of(int value, int width) {
  std::string s(width, '0');
  for (int b = 0; b < width; ++b)
    if (value >> (width - 1 - b) & 1) s[b] = '1';
  return s;
}

Eigen::MatrixXcd embedded_pauli(const anex::Encoding& enc, int m, anex::Pauli p) {
  return anex::detail::embed_logical(
      anex::to_matrix(anex::OperatorSum::single(1, 1, p)), m, 1, enc.n_pairs);
}

Json encode_result(const anex::HamiltonianSpec& spec, const std::string& kind,
                   int dense_cap) {
  const anex::Encoding enc = encoding_for(spec, kind, dense_cap);
  Json out;
  out["code"] = anex::code_name(enc.kind);
  out["n_pairs"] = enc.n_pairs;
  out["n_qubits"] = enc.n_qubits;

  Json words = Json::array();
  for (std::size_t l = 0; l < enc.codewords.size(); ++l) {
    Json w;
    w["logical"] = bits_of(static_cast<int>(l), enc.n_pairs);
    w["physical_index"] = enc.codewords[l];
    w["physical_bits"] = bits_of(enc.codewords[l], enc.n_qubits);
    words.push_back(std::move(w));
  }
  out["codewords"] = std::move(words);

  Json rel;
  rel["logical_z_scale"] = anex::detail::restriction_scale(
      enc, enc.logical_z(1), embedded_pauli(enc, 1, anex::Pauli::Z), dense_cap);
  rel["logical_x_scale"] = anex::detail::restriction_scale(
      enc, enc.logical_x(1), embedded_pauli(enc, 1, anex::Pauli::X), dense_cap);
  rel["logical_y_scale"] = anex::detail::restriction_scale(
      enc, enc.logical_y(1), embedded_pauli(enc, 1, anex::Pauli::Y), dense_cap);
  Json entangling = Json::array();
  for (int m = 1; m < enc.n_pairs; ++m) {
    const anex::EntanglingAction act = anex::entangling_generator(enc, m);
    Json e;
    e["sites"] = Json::array({2 * m, 2 * m + 1});
    e["zz_vs_logical_zz"] = act.scale;
    e["residual"] = act.residual;
    entangling.push_back(std::move(e));
  }
  rel["entangling"] = std::move(entangling);
  out["relations"] = std::move(rel);

  Json dfs = Json::array();
  dfs.push_back(anex::dfs_report_to_json(
      anex::dfs_check(enc, anex::BathKind::CollectiveDephasing)));
  dfs.push_back(anex::dfs_report_to_json(
      anex::dfs_check(enc, anex::BathKind::AntiCorrelatedDephasing)));
  out["dfs"] = std::move(dfs);

  std::vector<anex::OperatorSum> gens;
  for (int m = 1; m <= enc.n_pairs; ++m) {
    gens.push_back(enc.logical_z(m));
    gens.push_back(enc.logical_x(m));
  }
  for (int m = 1; m < enc.n_pairs; ++m)
    gens.push_back(anex::entangling_generator(enc, m).physical);
  const anex::RestrictedClosure rc =
      anex::restricted_closure(gens, enc.projector, -1, dense_cap);
  Json closure;
  closure["dimension"] = rc.dimension;
  closure["traceless_dimension"] = rc.traceless_dim;
  closure["full_special_unitary"] = rc.full_special_unitary;
  closure["converged"] = rc.converged;
  out["restricted_closure"] = std::move(closure);
  return out;
}

Eigen::MatrixXcd matrix_from_json_text(const std::string& text) {
  nlohmann::json js;
  try {
    js = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw anex::ParseError(1, 1, std::string("invalid JSON: ") + e.what());
  }
  if (!js.is_array() || js.empty())
    throw anex::ParseError(1, 1, "target matrix must be an array of rows");
  const std::size_t dim = js.size();
  Eigen::MatrixXcd m(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    if (!js[r].is_array() || js[r].size() != dim)
      throw anex::ParseError(1, 1, "target matrix must be square");
    for (std::size_t c = 0; c < dim; ++c) {
      const auto& cell = js[r][c];
      if (cell.is_number()) {
        m(r, c) = cell.get<double>();
      } else if (cell.is_array() && cell.size() == 2 && cell[0].is_number() &&
                 cell[1].is_number()) {
        m(r, c) = std::complex<double>(cell[0].get<double>(),
                                       cell[1].get<double>());
      } else {
        throw anex::ParseError(
            1, 1, "matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

Eigen::MatrixXcd named_single_qubit_target(const std::string& name, double angle) {
  const std::complex<double> i(0, 1);
  Eigen::MatrixXcd m(2, 2);
  if (name == "hadamard") {
    m << -i, -i, -i, i;
    m /= std::sqrt(2.0);
    return m;
  }
  if (name == "rz") {
    m << std::exp(-i * (angle / 2)), 0, 0, std::exp(i * (angle / 2));
    return m;
  }
  if (name == "rx") {
    m << std::cos(angle / 2), -i * std::sin(angle / 2),
        -i * std::sin(angle / 2), std::cos(angle / 2);
    return m;
  }
  throw anex::ContractError("unknown target '" + name + "'");
}

Eigen::MatrixXcd cnot_matrix() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

struct SynthArgs {
  std::string spec_path, target, target_file, kind = "as", out;
  int pair = 1;
  int budget = 20;
  int dense_cap = anex::kDefaultDenseCap;
  double angle = std::numeric_limits<double>::quiet_NaN();
  bool bare = false;
};

Json synth_result(const SynthArgs& args, const anex::HamiltonianSpec& spec,
                  const Eigen::MatrixXcd* file_matrix) {
  Json out;
  out["target"] = args.target.empty() ? "file" : args.target;
  out["code"] = args.bare ? "bare" : anex::code_name(kind_of(args.kind));

  if (args.target == "cphase") {
    const anex::Encoding enc = encoding_for(spec, args.kind, args.dense_cap);
    const double angle = std::isnan(args.angle) ? std::numbers::pi / 4 : args.angle;
    out["pair"] = args.pair;
    out["angle"] = angle;
    const anex::GateResult gate =
        anex::entangling_schedule(spec, enc, args.pair, angle, args.dense_cap);
    if (enc.n_pairs == 2) {
      Eigen::MatrixXcd cz = Eigen::MatrixXcd::Identity(4, 4);
      cz(3, 3) = -1.0;
      const Eigen::MatrixXcd restricted =
          enc.isometry.adjoint() * gate.unitary * enc.isometry;
      out["cz_equivalent"] = anex::locally_equivalent(restricted, cz);
    }
    out["gate"] = anex::gate_result_to_json(gate);
    return out;
  }

  // Compiled targets: bare physical space or the full code space.
  const bool compiled = args.target == "cnot" || file_matrix != nullptr;
  if (compiled && (args.bare || file_matrix == nullptr ||
                   file_matrix->rows() > 2)) {
    Eigen::MatrixXcd target =
        args.target == "cnot" ? cnot_matrix() : *file_matrix;
    std::vector<anex::OperatorSum> gens;
    Eigen::MatrixXcd isometry;
    if (args.bare) {
      const anex::ControlSystem sys = anex::control_generators(spec);
      if (!sys.drift.is_zero()) gens.push_back(sys.drift);
      for (const auto& g : sys.generators)
        if (!g.is_zero()) gens.push_back(g);
      const Eigen::Index dim = Eigen::Index{1} << spec.n_qubits;
      if (target.rows() != dim)
        throw anex::DimensionError(
            "bare target must match the physical dimension " +
            std::to_string(dim));
      isometry = Eigen::MatrixXcd::Identity(dim, dim);
    } else {
      const anex::Encoding enc = encoding_for(spec, args.kind, args.dense_cap);
      for (int m = 1; m <= enc.n_pairs; ++m) {
        gens.push_back(enc.logical_z(m));
        gens.push_back(enc.logical_x(m));
      }
      for (int m = 1; m < enc.n_pairs; ++m)
        gens.push_back(anex::entangling_generator(enc, m).physical);
      isometry = enc.isometry;
    }
    anex::CompileOptions opts;
    opts.dense_cap = args.dense_cap;
    const anex::GateResult gate =
        anex::compile_gate(target, gens, isometry, args.budget, opts);
    Json names = Json::array();
    for (const auto& g : gens) names.push_back(g.str());
    out["generators"] = std::move(names);
    out["budget"] = args.budget;
    out["gate"] = anex::gate_result_to_json(gate);
    return out;
  }

  // Encoded single-qubit rotations via Euler schedules.
  const anex::Encoding enc = encoding_for(spec, args.kind, args.dense_cap);
  Eigen::MatrixXcd target;
  if (file_matrix != nullptr) {
    target = *file_matrix;
  } else {
    const double angle = std::isnan(args.angle) ? std::numbers::pi / 2 : args.angle;
    target = named_single_qubit_target(args.target, angle);
    if (args.target != "hadamard") out["angle"] = angle;
  }
  out["pair"] = args.pair;
  const anex::GateResult gate =
      anex::euler_schedule(spec, enc, args.pair, target, args.dense_cap);
  out["gate"] = anex::gate_result_to_json(gate);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic exchange workbench: symmetry classification, "
               "pair encodings, and encoded gate synthesis"};
  app.require_subcommand(1);
  int rc = 0;

  // classify -------------------------------------------------------------
  auto* classify = app.add_subcommand(
      "classify", "Symmetry and universality classification of a device");
  {
    static std::string spec_path, out;
    static int dim_cap = -1;
    classify->add_option("spec", spec_path, "device description file")->required();
    classify->add_option("--dim-cap", dim_cap, "Lie closure dimension cap");
    classify->add_option("--out", out, "write the report to this file");
    classify->callback([&] {
      rc = emit_report("classify", out, [&](Json& report) {
        const std::string text = read_file(spec_path);
        report["input_digest"] = anex::input_digest(text);
        const anex::HamiltonianSpec spec = anex::parse_spec(text);
        Json result;
        result["n_qubits"] = spec.n_qubits;
        result["controllable"] = spec.controllable;
        const anex::ClosureReport rep = anex::universality_report(spec, dim_cap);
        result.update(anex::closure_report_to_json(rep));
        report["result"] = std::move(result);
      });
    });
  }

  // encode ---------------------------------------------------------------
  auto* encode = app.add_subcommand(
      "encode", "Construct a two-qubit-per-pair encoding and its checks");
  {
    static std::string spec_path, kind = "as", out;
    static int dense_cap = anex::kDefaultDenseCap;
    encode->add_option("spec", spec_path, "device description file")->required();
    encode->add_option("--kind", kind, "code kind: as|aa");
    encode->add_option("--dense-cap", dense_cap, "dense matrix qubit cap");
    encode->add_option("--out", out, "write the report to this file");
    encode->callback([&] {
      rc = emit_report("encode", out, [&](Json& report) {
        const std::string text = read_file(spec_path);
        report["input_digest"] = anex::input_digest(text);
        const anex::HamiltonianSpec spec = anex::parse_spec(text);
        report["result"] = encode_result(spec, kind, dense_cap);
      });
    });
  }

  // synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "Synthesize an encoded gate schedule for a target");
  {
    static SynthArgs args;
    synth->add_option("spec", args.spec_path, "device description file")->required();
    synth->add_option("--target", args.target,
                      "named target: hadamard|rz|rx|cphase|cnot");
    synth->add_option("--target-file", args.target_file,
                      "JSON matrix file (rows of numbers or [re, im] pairs)");
    synth->add_option("--kind", args.kind, "code kind: as|aa");
    synth->add_option("--pair", args.pair, "logical qubit (pair index)");
    synth->add_option("--angle", args.angle, "rotation angle where applicable");
    synth->add_option("--budget", args.budget, "segment budget for compilation");
    synth->add_option("--dense-cap", args.dense_cap, "dense matrix qubit cap");
    synth->add_flag("--bare", args.bare,
                    "compile on the physical register, no encoding");
    synth->add_option("--out", args.out, "write the report to this file");
    synth->callback([&] {
      rc = emit_report("synth", args.out, [&](Json& report) {
        std::string bytes = read_file(args.spec_path);
        std::string target_text;
        if (!args.target_file.empty()) {
          target_text = read_file(args.target_file);
          bytes += target_text;
        }
        report["input_digest"] = anex::input_digest(bytes);
        if (args.target.empty() == args.target_file.empty())
          throw anex::ContractError(
              "exactly one of --target or --target-file is required");
        const anex::HamiltonianSpec spec = anex::parse_spec(
            args.target_file.empty() ? bytes
                                     : bytes.substr(0, bytes.size() - target_text.size()));
        Eigen::MatrixXcd file_matrix;
        const Eigen::MatrixXcd* fm = nullptr;
        if (!args.target_file.empty()) {
          file_matrix = matrix_from_json_text(target_text);
          fm = &file_matrix;
        }
        report["result"] = synth_result(args, spec, fm);
      });
    });
  }

  // simulate ---------------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "Evolve a state under a control schedule and measure");
  {
    static std::string spec_path, schedule_path, init = "ground", kind = "as", out;
    static int dense_cap = anex::kDefaultDenseCap;
    static std::vector<int> measure;
    simulate->add_option("spec", spec_path, "device description file")->required();
    simulate->add_option("--schedule", schedule_path, "JSON schedule file");
    simulate->add_option("--init", init, "initial state: ground | logical bits");
    simulate->add_option("--kind", kind, "code kind for logical init: as|aa");
    simulate->add_option("--measure", measure, "pair indices to measure at the end");
    simulate->add_option("--dense-cap", dense_cap, "dense matrix qubit cap");
    simulate->add_option("--out", out, "write the report to this file");
    simulate->callback([&] {
      rc = emit_report("simulate", out, [&](Json& report) {
        const std::string spec_text = read_file(spec_path);
        std::string schedule_text;
        anex::ControlSchedule schedule;
        if (!schedule_path.empty()) {
          schedule_text = read_file(schedule_path);
          schedule = anex::schedule_from_string(schedule_text);
        }
        report["input_digest"] = anex::input_digest(spec_text + schedule_text);
        const anex::HamiltonianSpec spec = anex::parse_spec(spec_text);

        Json result;
        result["n_qubits"] = spec.n_qubits;
        anex::StateVector psi;
        Json initial;
        if (init == "ground") {
          const anex::GroundState g =
              anex::ground_state(anex::build_operator(spec), dense_cap);
          psi = g.state;
          initial["kind"] = "ground";
          initial["energy"] = g.energy;
          initial["degeneracy"] = g.degeneracy;
        } else {
          const anex::Encoding enc = encoding_for(spec, kind, dense_cap);
          if (static_cast<int>(init.size()) != enc.n_pairs)
            throw anex::ContractError("logical bitstring '" + init + "' needs " +
                                      std::to_string(enc.n_pairs) + " bits");
          int index = 0;
          for (char c : init) {
            if (c != '0' && c != '1')
              throw anex::ContractError("initial state must be 'ground' or a "
                                        "bitstring over {0, 1}");
            index = index * 2 + (c - '0');
          }
          Eigen::VectorXcd logical =
              Eigen::VectorXcd::Zero(Eigen::Index{1} << enc.n_pairs);
          logical(index) = 1.0;
          psi.n_qubits = spec.n_qubits;
          psi.amplitudes = anex::encode_state(enc, logical);
          initial["kind"] = "logical";
          initial["bitstring"] = init;
          initial["code"] = anex::code_name(enc.kind);
        }
        result["initial"] = std::move(initial);

        const anex::StateVector final_state =
            anex::run_schedule(spec, schedule, psi, dense_cap);
        result["segments"] = schedule.segments.size();
        result["total_duration"] = schedule.total_duration();
        result["final_state"] = anex::state_to_json(final_state.amplitudes);
        result["norm"] = final_state.norm();
        if (spec.n_qubits % 2 == 0) {
          const anex::Encoding enc = encoding_for(spec, kind, dense_cap);
          result["leakage"] = anex::leakage_of(enc, final_state.amplitudes);
        }
        if (!measure.empty()) {
          const anex::Encoding enc = encoding_for(spec, kind, dense_cap);
          Json all = Json::array();
          for (int m : measure) {
            const auto records = anex::measure_pair(final_state, m, enc);
            for (const auto& j : anex::measurements_to_json(records))
              all.push_back(j);
          }
          result["measurements"] = std::move(all);
        }
        report["result"] = std::move(result);
      });
    });
  }

  // closure ----------------------------------------------------------------
  auto* closure = app.add_subcommand(
      "closure", "Lie and associative closure of a raw generator list");
  {
    static std::string gens_path, out;
    static int n_qubits = 0;
    static int dim_cap = -1;
    closure->add_option("generators", gens_path,
                        "file with one operator rendering per line")->required();
    closure->add_option("--qubits", n_qubits, "register size the operators act on")
        ->required();
    closure->add_option("--dim-cap", dim_cap, "closure dimension cap");
    closure->add_option("--out", out, "write the report to this file");
    closure->callback([&] {
      rc = emit_report("closure", out, [&](Json& report) {
        const std::string text = read_file(gens_path);
        report["input_digest"] = anex::input_digest(text);
        if (n_qubits < 1)
          throw anex::ContractError("--qubits must be at least 1");
        std::vector<anex::OperatorSum> gens;
        Json rendered = Json::array();
        std::istringstream lines(text);
        std::string line;
        int line_no = 0;
        while (std::getline(lines, line)) {
          ++line_no;
          const auto first = line.find_first_not_of(" \t\r");
          if (first == std::string::npos || line[first] == '#') continue;
          gens.push_back(anex::parse_operator(line, n_qubits, line_no));
          rendered.push_back(gens.back().str());
        }
        if (gens.empty())
          throw anex::ContractError("generator file has no operators");
        const int cap = dim_cap > 0 ? dim_cap : 1 << (2 * n_qubits);

        Json result;
        result["n_qubits"] = n_qubits;
        result["generators"] = std::move(rendered);
        const anex::LieBasis lie = anex::lie_closure(gens, cap);
        Json lie_js;
        lie_js["dimension"] = lie.dimension;
        lie_js["traceless_dimension"] = anex::traceless_dimension(lie);
        lie_js["converged"] = lie.converged;
        lie_js["bracket_depth"] = lie.depth;
        result["lie"] = std::move(lie_js);
        const anex::AssociativeClosure assoc = anex::associative_closure(gens, cap);
        Json assoc_js;
        assoc_js["dimension"] = assoc.dimension;
        assoc_js["converged"] = assoc.converged;
        result["associative"] = std::move(assoc_js);

        bool number = true, parity = true, first_g = true;
        anex::Grading overall = anex::Grading::NumberConserving;
        for (const auto& g : gens) {
          number = number && anex::conserves(g, anex::Symmetry::Number);
          parity = parity && anex::conserves(g, anex::Symmetry::Parity);
          const auto gr = anex::grading(g).overall;
          overall = first_g ? gr : anex::grading_join(overall, gr);
          first_g = false;
        }
        result["conserves_number"] = number;
        result["conserves_parity"] = parity;
        result["grading"] = anex::grading_name(overall);
        report["result"] = std::move(result);
      });
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
