// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <quadaffine/definite.hpp>
#include <quadaffine/generate.hpp>

#include <doctest.h>

using namespace quadaffine;
using namespace quadaffine::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

// Separable face field with nu11 + nu22 = (2 cos a + 2 cos b - 4) nu and
// lambda = 1 in its own gauge.
VectorField unit_lambda_conormal(double a = 0.2, double b = 0.25, int n = 9) {
  const double c = std::acos(std::cos(a) + std::cos(b) - 1.0);
  VectorField nu(GridDomain(n + 1, n + 1), Carrier::Face);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double I = i + 0.5, J = j - n / 2.0 + 0.5;
      nu(i, j) = Vec3(std::cos(a * I) * std::cos(b * J), std::sin(a * I) * std::cos(b * J), std::sin(c * J));
    }
  return nu;
}

double spread(const ScalarField& f) {
  const FieldStats s = stats(f);
  return s.max - s.min;
}

}  // namespace

TEST_CASE("paraboloid hand net") {
  const ConjugateNet net = hand_paraboloid();
  CHECK(validate_conjugate(net).pass);

  const Deltas D = deltas(net);
  for (const ScalarField* f : {&D.D1, &D.D2, &D.D3, &D.D4}) CHECK(max_abs_deviation(*f, 1.0) == 0.0);
  CHECK(max_abs(D.special) == 0.0);
  CHECK(max_abs_deviation(vertex_metric(net), 1.0) == 0.0);

  const DefiniteInvariants inv = analyze_definite(net);
  for (const ScalarField* f : {&inv.params.Omega, &inv.params.alpha, &inv.params.beta, &inv.params.gamma,
                               &inv.params.delta, &inv.params.lambda})
    CHECK(max_abs_deviation(*f, 1.0) <= 1e-12);
  inv.xi.for_each_defined([](int, int, const Vec3& x) { CHECK((x - Vec3(0, 0, 1)).norm() <= 1e-12); });
  CHECK(max_abs(inv.Hstar) <= 1e-12);
  for (const ScalarField* f : {&inv.curvature.H1star, &inv.curvature.H2star, &inv.curvature.H,
                               &inv.derivatives.E, &inv.derivatives.F})
    CHECK(max_abs(*f) <= 1e-12);
  for (const VectorField* f : {&inv.derivatives.D1p, &inv.derivatives.D1m, &inv.derivatives.D2p, &inv.derivatives.D2m})
    f->for_each_defined([](int, int, const Vec3& x) { CHECK(x.norm() <= 1e-12); });
  CHECK(inv.residuals.worst() <= 1e-12);
  // Co-normal is (i + 1/2, j + 1/2, 1) up to the rho gauge.
  inv.nu.for_each_defined([](int i, int j, const Vec3& n) {
    CHECK(n.cross(Vec3(i + 0.5, j + 0.5, 1.0)).norm() <= 1e-12 * n.norm());
  });
}

TEST_CASE("parameters from the paraboloid co-normal") {
  const VectorField nu = sample_builtin("paraboloid-definite", {{"n", 6}}).nu;
  const DefiniteParameters p = parameters_from_conormal(nu);
  for (const ScalarField* f : {&p.Omega, &p.alpha, &p.beta, &p.gamma, &p.delta, &p.lambda})
    CHECK(max_abs_deviation(*f, 1.0) == 0.0);
  CHECK(p.max_closure == 0.0);
  const MoutardFit m = moutard_coefficient_definite(nu);
  CHECK(max_abs(m.Hstar) == 0.0);
  CHECK(m.max_residual == 0.0);
}

TEST_CASE("metric homogeneity") {
  const ConjugateNet net(generate_builtin("definite-cubic").q);
  const double k = 2.0;  // exact scaling keeps the comparison exact
  const ScalarField a = vertex_metric(net);
  const ScalarField b = vertex_metric(ConjugateNet(affine_image(net.q, k * Mat3::Identity(), Vec3::Zero())));
  a.for_each_defined([&](int i, int j, double o) { CHECK(b(i, j) * b(i, j) == doctest::Approx(8.0 * o * o).epsilon(1e-14)); });
}

TEST_CASE("broken planarity is located") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField q = hand_paraboloid().q;
  q(3, 2) += 0.1 * Vec3(u(rng), u(rng), u(rng));
  const ValidationReport v = validate_conjugate(ConjugateNet(q));
  CHECK_FALSE(v.pass);
  REQUIRE(v.failures.size() == 4);
  for (const Index& f : v.failures) {
    CHECK((f.i == 2 || f.i == 3));
    CHECK((f.j == 1 || f.j == 2));
  }
}

TEST_CASE("special condition decides co-normal existence") {
  // Non-uniform v spacing keeps faces planar but breaks D1 D3 = D2 D4.
  const double ys[] = {0.0, 1.0, 1.7, 3.1, 3.9, 5.5};
  const ConjugateNet uneven(make_vertex_field<Vec3>(GridDomain(6, 6), [&](int i, int j) {
    return Vec3(-i, -ys[j], 0.5 * (double(i) * i + ys[j] * ys[j]));
  }));
  CHECK(validate_conjugate(uneven).pass);
  CHECK(max_abs(deltas(uneven).special) > 1e-3);
  CHECK(code_of([&] { conormal_field_definite(uneven); }) == ErrorCode::NoConormal);

  const ConjugateNet special(generate_builtin("definite-cubic-alt").q);
  CHECK(max_abs(deltas(special).special) <= 1e-12);
  CHECK_NOTHROW(conormal_field_definite(special));
}

TEST_CASE("co-normal arguments") {
  const ConjugateNet net = hand_paraboloid();
  CHECK(code_of([&] { conormal_field_definite(net, -1.0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([&] { conormal_field_definite(net, 1.0, {0, 0}); }) == ErrorCode::InvalidParameter);
  const DefiniteConormal c = conormal_field_definite(net, 1.7, {2, 3});
  CHECK(c.alpha(2, 3) == 1.7);
}

TEST_CASE("cubic nets: recovered co-normal and parameter identities") {
  for (const char* name : {"definite-cubic", "definite-cubic-alt"}) {
    CAPTURE(name);
    const GeneratedNet g = generate_builtin(name);
    const ConjugateNet net(g.q);
    CHECK(validate_conjugate(net).pass);
    const DefiniteInvariants inv = analyze_definite(net);
    CHECK(inv.residuals.worst() <= 1e-9);

    // Proportional to the generating field, with one ratio per face parity.
    std::optional<double> ratio[2];
    inv.nu.for_each_defined([&](int i, int j, const Vec3& n) {
      const Vec3& t = g.sample.nu(i, j);
      CHECK(n.cross(t).norm() <= 1e-10 * n.norm() * t.norm());
      const double r = n.dot(t) / t.squaredNorm();
      auto& slot = ratio[(i + j) % 2];
      if (!slot) slot = r;
      CHECK(r == doctest::Approx(*slot).epsilon(1e-10));
    });

    const DefiniteParameters& p = inv.params;
    p.alpha.for_each_defined([&](int i, int j, double a) {
      CHECK((a + p.gamma(i, j)) * (p.beta(i, j) + p.delta(i, j)) == doctest::Approx(4.0).epsilon(1e-10));
      CHECK(p.lambda(i, j) == doctest::Approx((p.beta(i, j) + p.delta(i, j)) / 2.0).epsilon(1e-12));
      CHECK(p.lambda(i, j) == doctest::Approx(2.0 / (a + p.gamma(i, j))).epsilon(1e-10));
    });
  }
}

TEST_CASE("Moutard coefficient recovers the generating schedule") {
  const BuiltinSample s = sample_builtin("definite-cubic-alt");
  const MoutardFit m = moutard_coefficient_definite(s.nu);
  CHECK(m.max_residual <= 1e-12);
  // Face (i,j) of the crop sits at lattice (i, j + K) with K = 3.
  const int K = int(s.params.at("K"));
  m.Hstar.for_each_defined([&](int i, int j, double h) {
    const double expected = (i + j + K) % 2 == 0 ? 0.0 : s.params.at("odd");
    CHECK(std::abs(h - expected) <= 1e-10);
  });

  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField noisy = s.nu;
  for (auto& x : noisy.values()) x += 1e-3 * Vec3(u(rng), u(rng), u(rng));
  CHECK(moutard_coefficient_definite(noisy).max_residual > 0.0);
}

TEST_CASE("rho gauge leaves Omega unchanged and rescales lambda by parity") {
  const VectorField nu = sample_builtin("definite-cubic").nu;
  const DefiniteParameters a = parameters_from_conormal(nu);
  const DefiniteParameters b = parameters_from_conormal(rho_rescale(nu, 1.3));
  CHECK(max_rel_diff(a.Omega, b.Omega) <= 1e-13);
  // lambda = (beta + delta)/2 carries the gauge of the face ahead of the
  // vertex: rho where i + j is even, 1/rho where it is odd.
  a.lambda.for_each_defined([&](int i, int j, double x) {
    const double factor = (i + j) % 2 == 0 ? 1.3 : 1.0 / 1.3;
    CHECK(b.lambda(i, j) == doctest::Approx(factor * x).epsilon(1e-13));
  });
  b.alpha.for_each_defined([&](int i, int j, double x) {
    CHECK((x + b.gamma(i, j)) * (b.beta(i, j) + b.delta(i, j)) == doctest::Approx(4.0).epsilon(1e-12));
  });
}

TEST_CASE("dual Lelieuvre responds linearly to a scaled normal") {
  const ConjugateNet net(generate_builtin("definite-cubic").q);
  const DefiniteInvariants inv = analyze_definite(net);
  const ResidualReport base = dual_lelieuvre_residuals(inv.nu, inv.params.lambda, net, inv.xi);
  VectorField scaled = inv.xi;
  for (auto& x : scaled.values()) x *= 1.1;
  const ResidualReport bumped = dual_lelieuvre_residuals(inv.nu, inv.params.lambda, net, scaled);
  CHECK(base.worst() <= 1e-12);
  CHECK(bumped.worst() > 1e-3);
}

TEST_CASE("unit lambda net with constant H*") {
  const VectorField nu = unit_lambda_conormal();
  const ConjugateNet net = lelieuvre_integrate_definite(nu);
  DefiniteOptions opt;
  opt.seed_alpha = parameters_from_conormal(nu).alpha(1, 1);
  const DefiniteInvariants inv = analyze_definite(net, opt);
  CHECK(max_abs_deviation(inv.params.lambda, 1.0) <= 1e-12);
  const double h = 2.0 * std::cos(0.2) + 2.0 * std::cos(0.25) - 4.0;
  CHECK(max_abs_deviation(inv.Hstar, h) <= 1e-12);
  const DefiniteParameters& p = inv.params;
  inv.curvature.H.for_each_defined([&](int i, int j, double H) {
    CHECK(H == doctest::Approx(h / (p.beta(i + 1, j) * p.Omega(i + 1, j) + p.delta(i, j + 1) * p.Omega(i, j + 1))));
  });
  CHECK(inv.residuals.worst() <= 1e-9);
}

TEST_CASE("proper affine sphere: diagonal coefficients") {
  const ConjugateNet net = definite_sphere();
  CHECK(validate_conjugate(net).pass);
  const VectorField xi = affine_normal_definite(net, vertex_metric(net));
  xi.for_each_defined([&](int i, int j, const Vec3& x) { CHECK((x + net.q(i, j)).norm() <= 1e-12); });

  ScalarField lambda(net.domain(), Carrier::Vertex);
  for (auto& x : lambda.values()) x = 1.0;
  const DiagonalFit fit = diagonal_coefficients_fit(net, xi, lambda);
  CHECK(fit.residual <= 1e-10);
  // With xi = -q the diagonal derivatives are minus the diagonals.
  CHECK(max_abs_deviation(fit.a, -1.0) <= 1e-10);
  CHECK(max_abs_deviation(fit.b, -1.0) <= 1e-10);
  CHECK(max_abs_deviation(fit.c, 1.0) <= 1e-10);
  CHECK(max_abs_deviation(fit.d, -1.0) <= 1e-10);
}

TEST_CASE("orthogonality of weighted derivatives on random special nets") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    // The column recursion is a Cauchy problem for an elliptic equation, so
    // only slowly varying seed perturbations stay bounded across the columns.
    double w[12];
    for (double& x : w) x = 0.3 * u(rng);
    auto wave = [&](const double* k, int j) {
      return 0.05 * Vec3(std::sin(k[0] * j + k[3]), std::sin(k[1] * j + k[4]), std::sin(k[2] * j + k[5]));
    };
    DefiniteSeed seed;
    for (int j = 0; j <= 14; ++j) {
      seed.col0.push_back(Vec3(0.5, j + 0.5, 1.0) + wave(w, j));
      seed.col1.push_back(Vec3(1.5, j + 0.5, 1.0) + wave(w + 6, j));
    }
    seed.hstar = constant_schedule(0.02 * u(rng));
    seed.columns = 7;
    const VectorField full = moutard_extend_definite(seed);
    const VectorField nu = crop(full, {0, 5}, {6, 9});
    const ConjugateNet net = lelieuvre_integrate_definite(nu);
    REQUIRE(validate_conjugate(net).pass);
    const DefiniteInvariants inv = analyze_definite(net);
    for (const char* name : {"orth_def_d1p", "orth_def_d1m", "orth_def_d2p", "orth_def_d2m"})
      CHECK(inv.residuals.at(name).max <= 1e-10);
    CHECK(inv.residuals.worst() <= 1e-9);
  }
}

TEST_CASE("definite reconstruction") {
  SUBCASE("all-ones data gives the paraboloid") {
    const DefiniteInvariants inv = analyze_definite(hand_paraboloid(7));
    DefiniteStructure s = structure_of(inv);
    for (ScalarField* f : {&s.Omega, &s.lambda, &s.alpha, &s.beta})
      for (int j = 1; j + 1 < 7; ++j)
        for (int i = 1; i + 1 < 7; ++i) f->set(i, j, 1.0);
    const DefiniteReconstruction r = reconstruct_definite(s);
    const Registration reg = affine_register(r.net.q, hand_paraboloid(7).q, {{1, 1}, {2, 1}, {1, 2}, {0, 1}});
    CHECK(reg.residual <= 1e-10);
    CHECK(std::abs(reg.det - 1.0) <= 1e-10);
  }
  for (const char* name : {"definite-cubic", "definite-cubic-alt"}) {
    CAPTURE(name);
    const GeneratedNet g = generate_builtin(name);
    const DefiniteReconstruction r = reconstruct_definite(structure_of(analyze_definite(ConjugateNet(g.q))));
    const Registration reg = affine_register(r.net.q, g.q, {{1, 1}, {2, 1}, {1, 2}, {0, 1}});
    CHECK(reg.residual <= 1e-8);
    CHECK(std::abs(reg.det - 1.0) <= 1e-8);
  }
  SUBCASE("violated first compatibility equation is refused") {
    DefiniteStructure s = structure_of(analyze_definite(ConjugateNet(generate_builtin("definite-cubic").q)));
    s.Omega(2, 3) *= 1.05;
    CHECK(code_of([&] { reconstruct_definite(s); }) == ErrorCode::CompatibilityViolation);
  }
  SUBCASE("too small") {
    DefiniteStructure s = structure_of(analyze_definite(hand_paraboloid(4)));
    CHECK(code_of([&] { reconstruct_definite(s); }) == ErrorCode::DomainTooSmall);
  }
}

TEST_CASE("equi-affine equivariance") {
  std::mt19937_64 rng(34);
  const ConjugateNet base(generate_builtin("definite-cubic-alt").q);
  const DefiniteInvariants a = analyze_definite(base);
  for (int t = 0; t < 10; ++t) {
    const Mat3 L = random_unimodular(rng);
    const DefiniteInvariants b = analyze_definite(ConjugateNet(affine_image(base.q, L, Vec3(0.5, 2.0, -1.0))));
    for (const auto& [x, y] : {std::pair{&a.params.Omega, &b.params.Omega}, {&a.params.alpha, &b.params.alpha},
                               {&a.params.beta, &b.params.beta}, {&a.params.gamma, &b.params.gamma},
                               {&a.params.delta, &b.params.delta}, {&a.params.lambda, &b.params.lambda},
                               {&a.D.D1, &b.D.D1}, {&a.D.D4, &b.D.D4}})
      CHECK(max_rel_diff(*x, *y) <= 1e-10);
    for (const auto& [x, y] : {std::pair{&a.Hstar, &b.Hstar}, {&a.curvature.H1star, &b.curvature.H1star},
                               {&a.curvature.H2star, &b.curvature.H2star}, {&a.curvature.H, &b.curvature.H}})
      CHECK(max_rel_diff(*x, *y, 1.0) <= 1e-10);
    const Mat3 Lit = L.inverse().transpose();
    a.nu.for_each_defined([&](int i, int j, const Vec3& n) { CHECK((Lit * n - b.nu(i, j)).norm() <= 1e-10 * n.norm()); });
    a.xi.for_each_defined([&](int i, int j, const Vec3& x) {
      CHECK((L * x - b.xi(i, j)).norm() <= 1e-10 * (L * x).norm());
    });
  }
  // Spread of H* across faces is a sanity check that the comparison above is not vacuous.
  CHECK(spread(a.Hstar) > 0.05);
}
