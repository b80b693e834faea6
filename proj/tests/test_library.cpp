#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "lagrangia/dynamics.hpp"
#include "lagrangia/library.hpp"
#include "lagrangia/model.hpp"

using namespace lagrangia;

namespace {

std::vector<CandidateExpr> atoms_of(const CoordinateSpace& space, std::initializer_list<const char*> names) {
    std::vector<CandidateExpr> out;
    for (const char* n : names) out.push_back(parse_term(space, n));
    return out;
}

}  // namespace

TEST_CASE("polynomial combinations counts and order") {
    CoordinateSpace space({"th"});
    auto atoms = atoms_of(space, {"th", "thd", "cos(th)", "sin(th)"});
    auto monos = polynomial_combinations(atoms, 2);
    REQUIRE(monos.size() == 14);  // 4 of degree 1 + 10 of degree 2
    CHECK(monos[0].to_string(space) == "th");
    CHECK(monos[1].to_string(space) == "thd");
    CHECK(monos[4].to_string(space) == "th^2");
    CHECK(monos[5].to_string(space) == "th*thd");
    CHECK(monos.back().to_string(space) == "sin(th)^2");

    CoordinateSpace dbl({"th1", "th2"});
    auto vel = atoms_of(dbl, {"th1d", "th2d"});
    auto vm = polynomial_combinations(vel, 2);
    REQUIRE(vm.size() == 5);
    CHECK(vm[0].to_string(dbl) == "th1d");
    CHECK(vm[1].to_string(dbl) == "th2d");
    CHECK(vm[2].to_string(dbl) == "th1d^2");
    CHECK(vm[3].to_string(dbl) == "th1d*th2d");
    CHECK(vm[4].to_string(dbl) == "th2d^2");
}

TEST_CASE("polynomial combinations third order count") {
    CoordinateSpace space({"th", "x"});
    auto atoms = atoms_of(space, {"thd", "cos(th)", "sin(th)", "x", "xd"});
    CHECK(polynomial_combinations(atoms, 3).size() == 55);  // 5 + 15 + 35
}

TEST_CASE("polynomial combinations rejects bad input") {
    CoordinateSpace space({"th"});
    CHECK_THROWS_AS(polynomial_combinations({}, 2), ConfigError);
    CHECK_THROWS_AS(polynomial_combinations(atoms_of(space, {"th"}), 0), ConfigError);
}

TEST_CASE("cross terms") {
    CoordinateSpace space({"th"});
    auto a = atoms_of(space, {"cos(th)"});
    auto b = atoms_of(space, {"thd^2"});
    auto cross = cross_terms(a, b);
    REQUIRE(cross.size() == 1);
    CHECK(cross[0].to_string(space) == "thd^2*cos(th)");

    CoordinateSpace dbl({"th1", "th2"});
    auto trig = polynomial_combinations(
        atoms_of(dbl, {"cos(th1)", "sin(th1)", "cos(th2)", "sin(th2)"}), 2);
    auto vel = polynomial_combinations(atoms_of(dbl, {"th1d", "th2d"}), 2);
    CHECK(cross_terms(trig, vel).size() == 70);
    CHECK(trig.size() + vel.size() + cross_terms(trig, vel).size() == 89);
}

TEST_CASE("trivial term detection") {
    CoordinateSpace space({"th"});
    CHECK(is_trivial_term(parse_term(space, "th*thd"), space));
    CHECK(is_trivial_term(parse_term(space, "thd"), space));
    CHECK(is_trivial_term(parse_term(space, "thd*cos(th)"), space));
    CHECK_FALSE(is_trivial_term(parse_term(space, "thd^2"), space));
    CHECK_FALSE(is_trivial_term(parse_term(space, "cos(th)"), space));
    CHECK_FALSE(is_trivial_term(parse_term(space, "th^2"), space));
}

TEST_CASE("benchmark library sizes") {
    const std::vector<std::pair<SystemKind, int>> expected = {
        {SystemKind::single_pendulum, 12},
        {SystemKind::cart_pendulum, 55},
        {SystemKind::double_pendulum, 89},
        {SystemKind::spherical_pendulum, 59},
    };
    for (const auto& [kind, size] : expected) {
        const SystemSpec sys = SystemSpec::standard(kind);
        const auto lib = build_library(sys.space(), standard_library_spec(kind));
        INFO(to_string(kind));
        CHECK(lib.size() == size);
    }
}

TEST_CASE("benchmark libraries contain every true-model term") {
    for (const SystemKind kind : {SystemKind::single_pendulum, SystemKind::cart_pendulum,
                                  SystemKind::double_pendulum, SystemKind::spherical_pendulum}) {
        const SystemSpec sys = SystemSpec::standard(kind);
        const auto lib = build_library(sys.space(), standard_library_spec(kind));
        for (const auto& [term, value] : true_coefficients(sys)) {
            INFO(to_string(kind) << " " << term);
            CHECK(lib.index_of(term) >= 0);
            CHECK(value > 0);
        }
    }
}

TEST_CASE("library construction is deterministic") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::double_pendulum);
    const auto a = build_library(sys.space(), standard_library_spec(sys.kind));
    const auto b = build_library(sys.space(), standard_library_spec(sys.kind));
    REQUIRE(a.size() == b.size());
    for (int k = 0; k < a.size(); ++k)
        CHECK(a.terms[static_cast<std::size_t>(k)] == b.terms[static_cast<std::size_t>(k)]);
}

TEST_CASE("library terms are unique") {
    for (const SystemKind kind : {SystemKind::single_pendulum, SystemKind::cart_pendulum,
                                  SystemKind::double_pendulum, SystemKind::spherical_pendulum}) {
        const SystemSpec sys = SystemSpec::standard(kind);
        const auto lib = build_library(sys.space(), standard_library_spec(kind));
        std::set<std::vector<std::int8_t>> keys;
        for (const auto& t : lib.terms) keys.insert(t.monomial_key());
        CHECK(keys.size() == static_cast<std::size_t>(lib.size()));
    }
}

TEST_CASE("exclusion list must match produced terms") {
    CoordinateSpace space({"th"});
    LibrarySpec spec;
    spec.groups = {{{"th", "thd"}, 2}};
    spec.exclude = {"cos(th)"};
    CHECK_THROWS_AS(build_library(space, spec), ConfigError);
}

TEST_CASE("render model") {
    CoordinateSpace space({"th"}, {"θ"});
    auto lib = std::make_shared<CandidateLibrary>(
        make_library(space, {parse_term(space, "thd^2"), parse_term(space, "cos(th)")}));
    Eigen::VectorXd c(2);
    c << 0.5, 9.78;
    const auto model = make_model(lib, c);
    CHECK(render(model, 2) == "0.50·θ̇² + 9.78·cos(θ)");

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    CHECK(render(make_model(lib, zero), 2).empty());

    Eigen::VectorXd neg(2);
    neg << -0.5, 9.78;
    CHECK(render(make_model(lib, neg), 2) == "-0.50·θ̇² + 9.78·cos(θ)");
    neg << 0.5, -9.78;
    CHECK(render(make_model(lib, neg), 2) == "0.50·θ̇² - 9.78·cos(θ)");
}

TEST_CASE("model json round trip") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
    auto lib = std::make_shared<CandidateLibrary>(
        build_library(sys.space(), standard_library_spec(sys.kind)));
    auto model = true_model(sys, lib);
    model.prior_index = lib->require("thd^2");
    const auto j = model_to_json(model);
    const auto back = model_from_json(j, lib);
    CHECK(back.coefficients == model.coefficients);
    CHECK(back.prior_index == model.prior_index);
}
