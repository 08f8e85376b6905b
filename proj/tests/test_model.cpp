#include <catch2/catch_amalgamated.hpp>

#include "anex/dsl.hpp"
#include "anex/dense.hpp"
#include "anex/ladder.hpp"
#include "anex/schedule_io.hpp"
#include "oracle.hpp"

using namespace anex;
using oracle::cd;

namespace {

HamiltonianSpec two_site_exchange() {
  HamiltonianSpec s;
  s.n_qubits = 2;
  s.eps = {1.0, 0.5};
  s.fx = {0.0, 0.0};
  s.fy = {0.0, 0.0};
  s.couplings = {{1, 2, 0.75, 0.25, 0.5}};
  return s;
}

}  // namespace

TEST_CASE("parse_spec reads the documented grammar") {
  const auto spec = parse_spec(
      "qubits 2\n"
      "qubit 1 eps=1.0\n"
      "qubit 2 eps=0.4\n"
      "bond 1 2 Jx=1.0 Jy=1.0 Jz=0.0\n");
  REQUIRE(spec.n_qubits == 2);
  CHECK(spec.eps == std::vector<double>{1.0, 0.4});
  REQUIRE(spec.couplings.size() == 1);
  CHECK(spec.couplings[0].i == 1);
  CHECK(spec.couplings[0].j == 2);
  const auto ex = exchange_form(spec);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].delta == 0.0);
  CHECK(ex[0].j_sym == 2.0);
  CHECK(ex[0].jz == 0.0);
}

TEST_CASE("parse_spec handles comments, fields, dm, control lines") {
  const auto spec = parse_spec(
      "# device with transverse fields and a DM vector\n"
      "qubits 3\n"
      "\n"
      "qubit 1 eps=0.5 fx=0.25   # trailing comment\n"
      "qubit 2 eps=-0.5 fx=0 fy=0.125\n"
      "bond 1 2 Jx=1 Jy=0.5 Jz=0.25\n"
      "bond 2 3 Jx=0 Jy=0 Jz=1\n"
      "dm 1 2 dx=0.01 dy=0 dz=0\n"
      "control J1_2 eps1 Jz2_3\n");
  CHECK(spec.n_qubits == 3);
  CHECK(spec.eps == std::vector<double>{0.5, -0.5, 0.0});
  CHECK(spec.fx == std::vector<double>{0.25, 0.0, 0.0});
  CHECK(spec.fy == std::vector<double>{0.0, 0.125, 0.0});
  REQUIRE(spec.dm.size() == 1);
  CHECK(spec.dm[0].dx == 0.01);
  CHECK(spec.dm[0].dy == 0.0);
  REQUIRE(spec.controllable.size() == 3);
  CHECK(spec.is_controllable("J1_2"));
  CHECK(spec.is_controllable("eps1"));
  CHECK(spec.is_controllable("Jz2_3"));
  CHECK_FALSE(spec.is_controllable("Jx1_2"));
}

TEST_CASE("parse_spec rejects malformed input with positions") {
  auto expect_throw = [](std::string_view text, int line, int col) {
    try {
      parse_spec(std::string(text));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == line);
      CHECK(e.column == col);
    }
  };
  // i < j violated.
  expect_throw("qubits 2\nbond 1 1 Jx=0 Jy=0 Jz=0\n", 2, 6);
  // Site out of range.
  expect_throw("qubits 2\nqubit 3 eps=1\n", 2, 7);
  // Duplicate bond.
  expect_throw("qubits 2\nbond 1 2 Jx=0 Jy=0 Jz=0\nbond 1 2 Jx=1 Jy=0 Jz=0\n", 3, 6);
  // Unknown directive.
  expect_throw("qubits 2\nbind 1 2 Jx=0 Jy=0 Jz=0\n", 2, 1);
  // Body before header.
  expect_throw("qubit 1 eps=1\nqubits 2\n", 1, 1);
  // Bad number.
  expect_throw("qubits 2\nqubit 1 eps=abc\n", 2, 13);
  // Wrong field name.
  expect_throw("qubits 2\nbond 1 2 Jq=0 Jy=0 Jz=0\n", 2, 10);
  // Control name referencing an undeclared bond.
  expect_throw("qubits 2\ncontrol Jz1_2\n", 2, 9);
  // Missing header entirely.
  expect_throw("# nothing\n", 1, 1);
  // Duplicate dm entry.
  expect_throw("qubits 2\ndm 1 2 dx=0 dy=0 dz=1\ndm 1 2 dx=1 dy=0 dz=0\n", 3, 4);
}

TEST_CASE("render_spec then parse_spec is the identity") {
  auto spec = parse_spec(
      "qubits 4\n"
      "qubit 1 eps=0.5 fx=0.25 fy=-0.125\n"
      "qubit 3 eps=-1.5\n"
      "bond 1 2 Jx=0.75 Jy=0.25 Jz=0.5\n"
      "bond 2 3 Jx=0 Jy=0 Jz=0.125\n"
      "bond 3 4 Jx=1 Jy=1 Jz=0\n"
      "dm 1 2 dx=0.01 dy=0 dz=0.02\n"
      "control Jz2_3 J1_2 eps1\n");
  const std::string text = render_spec(spec);
  const auto again = parse_spec(text);
  CHECK(again.n_qubits == spec.n_qubits);
  CHECK(again.eps == spec.eps);
  CHECK(again.fx == spec.fx);
  CHECK(again.fy == spec.fy);
  CHECK(again.controllable == spec.controllable);
  REQUIRE(again.couplings.size() == spec.couplings.size());
  for (std::size_t k = 0; k < spec.couplings.size(); ++k) {
    CHECK(again.couplings[k].jx == spec.couplings[k].jx);
    CHECK(again.couplings[k].jy == spec.couplings[k].jy);
    CHECK(again.couplings[k].jz == spec.couplings[k].jz);
  }
  REQUIRE(again.dm.size() == spec.dm.size());
  CHECK(again.dm[0].dx == spec.dm[0].dx);
  // Render is a fixed point: rendering the reparse gives the same bytes.
  CHECK(render_spec(again) == text);
}

TEST_CASE("build_operator assembles fields, exchange, and DM terms") {
  auto spec = parse_spec(
      "qubits 2\n"
      "qubit 1 eps=1 fx=0.25\n"
      "qubit 2 eps=0.5 fx=0 fy=0.125\n"
      "bond 1 2 Jx=0.75 Jy=0.25 Jz=0.5\n"
      "dm 1 2 dx=0.01 dy=0.02 dz=0.03\n");
  const auto h = build_operator(spec);

  OperatorSum want(2);
  want.add(PauliString(2, "ZI"), 0.5);
  want.add(PauliString(2, "IZ"), 0.25);
  want.add(PauliString(2, "XI"), 0.25);
  want.add(PauliString(2, "IY"), 0.125);
  want.add(PauliString(2, "XX"), 0.75);
  want.add(PauliString(2, "YY"), 0.25);
  want.add(PauliString(2, "ZZ"), 0.5);
  want.add(PauliString(2, "YZ"), 0.01);
  want.add(PauliString(2, "ZY"), -0.01);
  want.add(PauliString(2, "ZX"), 0.02);
  want.add(PauliString(2, "XZ"), -0.02);
  want.add(PauliString(2, "XY"), 0.03);
  want.add(PauliString(2, "YX"), -0.03);
  CHECK(hs_norm(h - want) == 0.0);
  CHECK(h.is_hermitian());
}

TEST_CASE("dm_term matches the dense cross-product oracle") {
  const auto d = dm_term(2, 1, 2, 0.3, -0.7, 0.4);
  // d . (sigma_1 x sigma_2) expanded literally in the dense basis.
  const auto m = oracle::sum(
      2, {{"YZ", 0.3}, {"ZY", -0.3}, {"ZX", -0.7}, {"XZ", 0.7}, {"XY", 0.4}, {"YX", -0.4}});
  CHECK((to_matrix(d) - m).norm() < 1e-14);
  CHECK(d.is_hermitian());
  CHECK_THROWS_AS(dm_term(2, 2, 2, 1, 0, 0), DimensionError);
}

TEST_CASE("assignments override baselines and aliases preserve the partner") {
  auto spec = two_site_exchange();

  SECTION("raw overrides") {
    const auto h = build_operator(spec, {{"Jx1_2", 2.0}, {"eps2", 0.0}});
    CHECK(h.coefficient(PauliString(2, "XX")) == cd{2.0, 0});
    CHECK(h.coefficient(PauliString(2, "YY")) == cd{0.25, 0});
    CHECK(h.coefficient(PauliString(2, "IZ")) == cd{0.0, 0});
    CHECK(h.coefficient(PauliString(2, "ZI")) == cd{0.5, 0});
  }
  SECTION("J alias sets the sum and keeps the difference") {
    // Baseline: J = 1.0, Delta = 0.5. Assign J = 2.5 -> Jx, Jy = 1.5, 1.0.
    const auto h = build_operator(spec, {{"J1_2", 2.5}});
    CHECK(h.coefficient(PauliString(2, "XX")) == cd{1.5, 0});
    CHECK(h.coefficient(PauliString(2, "YY")) == cd{1.0, 0});
  }
  SECTION("D alias sets the difference and keeps the sum") {
    const auto h = build_operator(spec, {{"D1_2", 0.0}});
    CHECK(h.coefficient(PauliString(2, "XX")) == cd{0.5, 0});
    CHECK(h.coefficient(PauliString(2, "YY")) == cd{0.5, 0});
  }
  SECTION("J and D together fix the bond completely") {
    const auto h = build_operator(spec, {{"J1_2", 3.0}, {"D1_2", 1.0}});
    CHECK(h.coefficient(PauliString(2, "XX")) == cd{2.0, 0});
    CHECK(h.coefficient(PauliString(2, "YY")) == cd{1.0, 0});
  }
  SECTION("isotropic alias sets all three components") {
    const auto h = build_operator(spec, {{"Jh1_2", 0.5}});
    CHECK(h.coefficient(PauliString(2, "XX")) == cd{0.5, 0});
    CHECK(h.coefficient(PauliString(2, "YY")) == cd{0.5, 0});
    CHECK(h.coefficient(PauliString(2, "ZZ")) == cd{0.5, 0});
  }
  SECTION("alias conflicts are contract errors") {
    CHECK_THROWS_AS(build_operator(spec, {{"J1_2", 1.0}, {"Jx1_2", 1.0}}), ContractError);
    CHECK_THROWS_AS(build_operator(spec, {{"Jh1_2", 1.0}, {"Jz1_2", 1.0}}), ContractError);
    CHECK_THROWS_AS(build_operator(spec, {{"Jh1_2", 1.0}, {"D1_2", 1.0}}), ContractError);
    // Jz may accompany J/D: it is an independent axis.
    CHECK_NOTHROW(build_operator(spec, {{"J1_2", 1.0}, {"Jz1_2", 1.0}}));
  }
  SECTION("unknown names are contract errors that name the parameter") {
    try {
      build_operator(spec, {{"Jx1_3", 1.0}});
      FAIL("expected ContractError");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("Jx1_3") != std::string::npos);
    }
    CHECK_THROWS_AS(build_operator(spec, {{"eps7", 1.0}}), ContractError);
    CHECK_THROWS_AS(build_operator(spec, {{"bogus", 1.0}}), ContractError);
  }
}

TEST_CASE("build_operator is linear in every control parameter") {
  auto spec = parse_spec(
      "qubits 3\n"
      "qubit 1 eps=0.5\n"
      "bond 1 2 Jx=0.75 Jy=0.25 Jz=0.5\n"
      "bond 2 3 Jx=0 Jy=0 Jz=1\n"
      "dm 2 3 dx=0.01 dy=0 dz=0\n");
  const std::vector<std::string> params = {"eps2", "fx1", "fy3",   "Jx1_2",
                                           "Jy1_2", "Jz2_3", "dx2_3", "dz2_3"};
  for (const auto& p : params) {
    const auto h0 = build_operator(spec, {{p, 0.0}});
    const auto h1 = build_operator(spec, {{p, 1.0}});
    const auto h3 = build_operator(spec, {{p, 3.0}});
    // h(3) - h(0) == 3 * (h(1) - h(0)).
    CHECK(hs_norm((h3 - h0) - (h1 - h0) * 3.0) < 1e-14);
  }
}

TEST_CASE("zeroing every parameter yields the zero operator") {
  auto spec = two_site_exchange();
  const auto h = build_operator(spec, {{"eps1", 0.0},
                                       {"eps2", 0.0},
                                       {"Jx1_2", 0.0},
                                       {"Jy1_2", 0.0},
                                       {"Jz1_2", 0.0}});
  CHECK(h.terms().empty());
}

TEST_CASE("exchange-only devices stay parity even under any assignment") {
  auto spec = parse_spec(
      "qubits 4\n"
      "qubit 1 eps=0.5\n"
      "qubit 2 eps=-0.25\n"
      "bond 1 2 Jx=0.75 Jy=0.25 Jz=0.5\n"
      "bond 2 3 Jx=0 Jy=0 Jz=1\n"
      "bond 3 4 Jx=1 Jy=0.5 Jz=0\n");
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-2, 2);
  const std::vector<std::string> knobs = {"eps1", "eps3", "Jx1_2", "Jy1_2",
                                          "Jz2_3", "J3_4", "D3_4"};
  for (int trial = 0; trial < 5; ++trial) {
    std::map<std::string, double> a;
    for (const auto& k : knobs) a[k] = dist(rng);
    const auto g = grading(build_operator(spec, a));
    CHECK((g.overall == Grading::NumberConserving || g.overall == Grading::ParityEven));
  }
}

TEST_CASE("build_operator agrees with the dense oracle on a soup device") {
  auto spec = parse_spec(
      "qubits 3\n"
      "qubit 1 eps=1 fx=0.5 fy=-0.25\n"
      "qubit 2 eps=-0.5\n"
      "qubit 3 eps=0.25 fx=0.125\n"
      "bond 1 2 Jx=0.3 Jy=0.7 Jz=-0.2\n"
      "bond 1 3 Jx=0 Jy=0.1 Jz=0\n"
      "dm 1 2 dx=0.05 dy=-0.03 dz=0.01\n");
  const auto h = build_operator(spec);
  const auto want = oracle::sum(
      3, {{"ZII", 0.5},  {"IZI", -0.25}, {"IIZ", 0.125},  {"XII", 0.5},
          {"YII", -0.25}, {"IIX", 0.125}, {"XXI", 0.3},   {"YYI", 0.7},
          {"ZZI", -0.2},  {"YIY", 0.1},   {"YZI", 0.05},  {"ZYI", -0.05},
          {"ZXI", -0.03}, {"XZI", 0.03},  {"XYI", 0.01},  {"YXI", -0.01}});
  CHECK((to_matrix(h) - want).norm() < 1e-13);
}

TEST_CASE("block_form splits an even chain into pair modes") {
  auto spec = parse_spec(
      "qubits 4\n"
      "qubit 1 eps=1\n"
      "qubit 2 eps=0.5\n"
      "qubit 3 eps=-0.25\n"
      "qubit 4 eps=0.75\n"
      "bond 1 2 Jx=0.75 Jy=0.25 Jz=0.5\n"
      "bond 2 3 Jx=0.125 Jy=0.125 Jz=0.375\n"
      "bond 3 4 Jx=1 Jy=0.5 Jz=0\n");
  const auto bf = block_form(spec);
  REQUIRE(bf.n_pairs == 2);

  CHECK(bf.pairs[0].eps == 0.5);    // eps1 - eps2
  CHECK(bf.pairs[0].omega == 1.5);  // eps1 + eps2
  CHECK(bf.pairs[0].j == 1.0);      // Jx + Jy
  CHECK(bf.pairs[0].delta == 0.5);  // Jx - Jy
  CHECK(bf.pairs[0].jz == 0.5);
  CHECK(bf.pairs[1].eps == -1.0);
  CHECK(bf.pairs[1].omega == 0.5);
  CHECK(bf.pairs[1].j == 1.5);
  CHECK(bf.pairs[1].delta == 0.5);
  CHECK(bf.pairs[1].jz == 0.0);
  REQUIRE(bf.inter.size() == 1);
  CHECK(bf.inter[0].jz == 0.375);
  CHECK(bf.inter[0].j == 0.25);
  CHECK(bf.inter[0].delta == 0.0);

  // h1 collects (omega_m / 4) on each site's Z.
  CHECK(bf.h1.coefficient(PauliString(4, "ZIII")) == cd{0.375, 0});
  CHECK(bf.h1.coefficient(PauliString(4, "IZII")) == cd{0.375, 0});
  CHECK(bf.h1.coefficient(PauliString(4, "IIZI")) == cd{0.125, 0});
  CHECK(bf.h1.coefficient(PauliString(4, "IIIZ")) == cd{0.125, 0});

  // h0 keeps the intra-pair Ising pieces.
  CHECK(bf.h0.coefficient(PauliString(4, "ZZII")) == cd{0.5, 0});
  CHECK(bf.h0.coefficient(PauliString(4, "IIZZ")) == cd{0.0, 0});

  // (Rz)^2 - (Tz)^2 collapses to a pure ZZ word; the engine-computed scale.
  CHECK(bf.h0_identity_scale == 4.0);

  // Round trip: the block data reassembles the exact device Hamiltonian.
  const auto h = build_operator(spec);
  const auto re = bf.reassemble();
  CHECK(hs_norm(re - h) == 0.0);
  for (const auto& [word, c] : h.terms()) CHECK(re.coefficient(word) == c);
}

TEST_CASE("block_form rejects odd counts and long-range bonds") {
  CHECK_THROWS_AS(block_form(parse_spec("qubits 3\nqubit 1 eps=1\n")), ContractError);
  CHECK_THROWS_AS(
      block_form(parse_spec("qubits 4\nbond 1 3 Jx=1 Jy=0 Jz=0\n")),
      ContractError);
  CHECK_THROWS_AS(
      block_form(parse_spec("qubits 4\nbond 1 4 Jx=1 Jy=0 Jz=0\n")),
      ContractError);
  // (2m-1, 2m) and (2m, 2m+1) are both fine.
  CHECK_NOTHROW(block_form(parse_spec(
      "qubits 4\nbond 1 2 Jx=1 Jy=0 Jz=0\nbond 2 3 Jx=0 Jy=0 Jz=1\n"
      "bond 3 4 Jx=1 Jy=1 Jz=0\n")));
}

TEST_CASE("block reassembly stays within float tolerance on generic values") {
  auto spec = parse_spec(
      "qubits 4\n"
      "qubit 1 eps=0.9371\n"
      "qubit 2 eps=0.4218\n"
      "qubit 3 eps=-0.113\n"
      "qubit 4 eps=0.07\n"
      "bond 1 2 Jx=0.31 Jy=0.17 Jz=0.23\n"
      "bond 2 3 Jx=0.011 Jy=0.007 Jz=0.41\n"
      "bond 3 4 Jx=0.53 Jy=0.29 Jz=0.19\n");
  const auto h = build_operator(spec);
  const auto re = block_form(spec).reassemble();
  CHECK(hs_norm(re - h) < 1e-15 * hs_norm(h) + 1e-16);
}

TEST_CASE("schedule JSON round trips and validates against a device") {
  auto spec = two_site_exchange();
  spec.controllable = {"J1_2", "eps1"};

  ControlSchedule sched;
  sched.segments.push_back({{{"J1_2", 1.0}}, 0.5});
  sched.segments.push_back({{{"eps1", 2.0}, {"J1_2", 0.0}}, 0.25});

  const std::string text = schedule_to_string(sched);
  const auto back = schedule_from_string(text);
  REQUIRE(back.segments.size() == 2);
  CHECK(back.segments[0].assignments == sched.segments[0].assignments);
  CHECK(back.segments[1].assignments == sched.segments[1].assignments);
  CHECK(back.segments[0].duration == 0.5);
  CHECK(back.total_duration() == 0.75);
  // Deterministic bytes.
  CHECK(schedule_to_string(back) == text);

  CHECK_NOTHROW(validate_schedule(spec, sched));

  SECTION("unknown parameter is a contract error naming it") {
    ControlSchedule bad = sched;
    bad.segments[0].assignments["Jq1_2"] = 1.0;
    try {
      validate_schedule(spec, bad);
      FAIL("expected ContractError");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("Jq1_2") != std::string::npos);
    }
  }
  SECTION("driving a fixed parameter is a capability error naming it") {
    ControlSchedule bad = sched;
    bad.segments[1].assignments["Jz1_2"] = 2.0;
    try {
      validate_schedule(spec, bad);
      FAIL("expected CapabilityError");
    } catch (const CapabilityError& e) {
      CHECK(e.missing == "Jz1_2");
    }
  }
  SECTION("restating a fixed parameter at its baseline is allowed") {
    ControlSchedule ok = sched;
    ok.segments[0].assignments["Jz1_2"] = 0.5;  // baseline value
    CHECK_NOTHROW(validate_schedule(spec, ok));
  }
  SECTION("non-positive durations are rejected") {
    ControlSchedule bad = sched;
    bad.segments[0].duration = 0.0;
    CHECK_THROWS_AS(validate_schedule(spec, bad), ContractError);
  }
}

TEST_CASE("schedule parser rejects malformed JSON") {
  CHECK_THROWS_AS(schedule_from_string("not json"), ParseError);
  CHECK_THROWS_AS(schedule_from_string("{}"), ParseError);
  CHECK_THROWS_AS(schedule_from_string(R"({"segments": [{}]})"), ParseError);
  CHECK_THROWS_AS(
      schedule_from_string(R"({"segments": [{"assignments": {"a": "x"}, "duration": 1}]})"),
      ParseError);
  CHECK_NOTHROW(schedule_from_string(R"({"segments": []})"));
}
