#include <doctest.h>

#include "msuq/pod.hpp"
#include "msuq/sampling.hpp"

#include <cmath>
#include <random>

using namespace msuq;

namespace {

struct Setup {
  FeSpace coarse;
  FeSpace fine;
  SparseMatrix mass;
  AffineOperator op;
  SparseMatrix constraint;
  Vector alpha;
};

Setup rational_potential(Index nc, Index nf, std::size_t s, Box box = Box{{0.0, 0.0}, {1.0, 0.0}}) {
  RandomPotentialSpec spec;
  spec.v0 = BasePotential::constant_value(1.0);
  spec.form = ModeForm::rational_1d;
  spec.s = s;
  spec.q = 0.0;
  auto coarse = build_space(1, box, {nc, 1});
  auto fine = build_space(1, box, {nf, 1});
  auto map = nest(coarse, fine);
  auto a = constraint_cross(fine, coarse, map).matrix;
  auto alpha = hat_integrals(coarse);
  auto mass = assemble_mass(fine).matrix;
  auto op = affine_operator(spec, fine, 1.0);
  return {std::move(coarse), std::move(fine), std::move(mass), std::move(op), std::move(a), std::move(alpha)};
}

double mnorm2(const SparseMatrix& m, const Vector& v) { return v.dot(m * v); }

}  // namespace

TEST_CASE("projection error equals the sigma tail") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> qd(2, 64), nd(16, 256);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const Index q = qd(rng), nh = nd(rng);
    auto space = build_space(1, Box{{0.0, 0.0}, {1.0, 0.0}}, {nh, 1});
    auto m = assemble_mass(space).matrix;
    Matrix u(nh, q);
    for (Index j = 0; j < q; ++j)
      for (Index i = 0; i < nh; ++i) u(i, j) = g(rng) / (1.0 + 0.1 * static_cast<double>(j));
    auto dec = pod_decompose(u, m);
    double total = 0.0;
    for (Index j = 0; j < q; ++j) total += mnorm2(m, u.col(j));
    const double sigma_total = dec.sigma.sum();
    for (Index l = 0; l <= dec.rank(); ++l) {
      double err = 0.0;
      for (Index j = 0; j < q; ++j) {
        Vector r = u.col(j);
        for (Index k = 0; k < l; ++k) r -= dec.modes.col(k).dot(m * u.col(j)) * dec.modes.col(k);
        err += mnorm2(m, r);
      }
      const double tail = dec.sigma.tail(q - l).sum();
      const double lhs = err / total, rhs = tail / sigma_total;
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(rhs, 1e-300) + 1e-15);
    }
  }
}

TEST_CASE("modes are M-orthonormal") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto space = build_space(1, Box{{0.0, 0.0}, {1.0, 0.0}}, {100, 1});
  auto m = assemble_mass(space).matrix;
  Matrix u(100, 30);
  for (Index i = 0; i < u.size(); ++i) u.data()[i] = g(rng);
  auto dec = pod_decompose(u, m);
  Matrix gram = dec.modes.transpose() * m * dec.modes;
  CHECK((gram - Matrix::Identity(dec.rank(), dec.rank())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank from tolerance") {
  Vector sigma(4);
  sigma << 10.0, 1.0, 0.1, 0.0;
  CHECK(pod_rank_for_tolerance(sigma, 0.5) == 1);
  CHECK(pod_rank_for_tolerance(sigma, 0.05) == 2);
  CHECK(pod_rank_for_tolerance(sigma, 1e-3) == 3);
  CHECK(pod_rank_for_tolerance(sigma, 0.0) == 3);
  CHECK(pod_rank_for_tolerance(Vector::Zero(3), 0.1) == 0);
}

TEST_CASE("degenerate snapshot sets") {
  auto space = build_space(1, Box{{0.0, 0.0}, {1.0, 0.0}}, {64, 1});
  auto m = assemble_mass(space).matrix;
  SnapshotSet same{0, Matrix(64, 5)};
  Vector v = Vector::LinSpaced(64, 0.0, 1.0);
  for (Index j = 0; j < 5; ++j) same.snapshots.col(j) = v;
  auto pod = pod_reduce(same, m, {});
  CHECK(pod.rank() == 0);
  CHECK((pod.zeta0 - v).norm() < 1e-14);

  // mean + two fixed directions
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Vector d1 = Vector::Random(64), d2 = Vector::Random(64);
  SnapshotSet two{0, Matrix(64, 20)};
  for (Index j = 0; j < 20; ++j) two.snapshots.col(j) = v + g(rng) * d1 + g(rng) * d2;
  PodOptions opts;
  opts.fixed_rank.reset();
  for (double rho : {0.9, 0.1, 1e-6, 0.0}) {
    opts.rho = rho;
    auto p = pod_reduce(two, m, opts);
    CHECK(p.rank() <= 2);
    if (rho < 1e-3) CHECK(p.rank() == 2);
    for (Index k = 2; k < p.sigma.size(); ++k) CHECK(p.sigma[k] <= 1e-12 * p.sigma[0]);
  }
  CHECK_THROWS_AS(pod_reduce(SnapshotSet{0, Matrix(64, 1)}, m, {}), ConfigError);
}

TEST_CASE("POD bases satisfy the constraint structure") {
  auto s = rational_potential(8, 256, 16);
  auto rule = make_lattice_rule(31, cbc_generating_vector(31, 16, product_weights(16)), 1, 4);
  auto pts = lattice_points(rule, 0);
  pts.resize(20);
  auto sets = collect_snapshots(s.op, s.constraint, s.alpha, pts);
  CHECK(sets.size() == 8);
  for (const auto& set : sets)
    for (Index j = 0; j < set.snapshots.cols(); ++j) {
      Vector r = s.constraint * set.snapshots.col(j);
      r[set.node] -= s.alpha[set.node];
      CHECK(r.cwiseAbs().maxCoeff() <= 1e-10 * s.alpha[set.node]);
    }
  PodOptions opts;
  for (const auto& set : sets) {
    auto pod = pod_reduce(set, s.mass, opts, &s.constraint);
    CHECK(pod.rank() == 3);
    Vector c0 = s.constraint * pod.zeta0;
    c0[pod.node] -= s.alpha[pod.node];
    CHECK(c0.cwiseAbs().maxCoeff() <= 1e-10 * s.alpha[pod.node]);
    for (Index k = 0; k < pod.rank(); ++k) CHECK((s.constraint * pod.modes.col(k)).cwiseAbs().maxCoeff() <= 1e-10 * s.alpha[pod.node]);
    Matrix gram = pod.modes.transpose() * s.mass * pod.modes;
    CHECK((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("identical samples give identical snapshots") {
  auto s = rational_potential(4, 64, 3);
  std::vector<std::vector<double>> same(4, std::vector<double>{0.1, -0.2, 0.3});
  auto sets = collect_snapshots(s.op, s.constraint, s.alpha, same);
  for (const auto& set : sets)
    for (Index j = 1; j < 4; ++j) CHECK((set.snapshots.col(j) - set.snapshots.col(0)).norm() == 0.0);
  CHECK_THROWS_AS(collect_snapshots(s.op, s.constraint, s.alpha, std::vector<std::vector<double>>(1, {0, 0, 0})), ConfigError);
}

TEST_CASE("online tensors match direct evaluation") {
  auto s = rational_potential(8, 256, 6);
  auto pts = mc_points(5, 12, 6);
  PodOptions opts;
  auto model = build_pod_model(s.op, s.constraint, s.alpha, s.mass, pts, opts);
  std::vector<double> w{0.3, -0.1, 0.45, 0.0, -0.4, 0.2};
  SparseMatrix g = s.op.materialize(w);
  for (Index i = 0; i < 8; ++i) {
    const auto& pod = model.pods[static_cast<std::size_t>(i)];
    Matrix z(256, pod.rank() + 1);
    z.col(0) = pod.zeta0;
    z.rightCols(pod.rank()) = pod.modes;
    Matrix direct = z.transpose() * g * z;
    Matrix online = model.tensors.assemble(i, w);
    CHECK((direct - online).cwiseAbs().maxCoeff() <= 1e-11 * direct.cwiseAbs().maxCoeff());
    CHECK((online - online.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Matrix at0 = model.tensors.assemble(i, std::vector<double>(6, 0.0));
    Matrix direct0 = z.transpose() * s.op.base() * z;
    CHECK((direct0 - at0).cwiseAbs().maxCoeff() <= 1e-11 * direct0.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("online solution matches a subspace KKT oracle") {
  auto s = rational_potential(8, 256, 6);
  auto pts = mc_points(6, 12, 6);
  auto model = build_pod_model(s.op, s.constraint, s.alpha, s.mass, pts, PodOptions{});
  std::vector<double> w{-0.2, 0.1, 0.3, 0.25, -0.4, 0.05};
  SparseMatrix g = s.op.materialize(w);
  Matrix approx = online_basis(model.pods, model.tensors, w);
  for (Index i = 0; i < 8; ++i) {
    const auto& pod = model.pods[static_cast<std::size_t>(i)];
    const Index m = pod.rank() + 1;
    Matrix z(256, m);
    z.col(0) = pod.zeta0;
    z.rightCols(pod.rank()) = pod.modes;
    // minimize c^T Z^T G Z c subject to A Z c = alpha_i e_i; the constraint rows are dependent, so least squares KKT
    Matrix az = s.constraint * z;
    Matrix kkt = Matrix::Zero(m + 8, m + 8);
    kkt.topLeftCorner(m, m) = z.transpose() * g * z;
    kkt.topRightCorner(m, 8) = az.transpose();
    kkt.bottomLeftCorner(8, m) = az;
    Vector rhs = Vector::Zero(m + 8);
    rhs[m + i] = s.alpha[i];
    Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    Vector oracle = z * sol.head(m);
    CHECK((oracle - approx.col(i)).cwiseAbs().maxCoeff() <= 1e-10 * oracle.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("full-rank POD reproduces snapshot bases") {
  auto s = rational_potential(8, 256, 4);
  auto pts = mc_points(9, 10, 4);
  PodOptions opts;
  opts.fixed_rank.reset();
  opts.rho = 0.0;
  auto model = build_pod_model(s.op, s.constraint, s.alpha, s.mass, pts, opts);
  for (const auto& w : pts) {
    auto exact = build_basis(s.op, w, s.constraint, s.alpha);
    Matrix approx = online_basis(model.pods, model.tensors, w);
    for (Index i = 0; i < 8; ++i) {
      Vector d = exact.coefficients.col(i) - approx.col(i);
      CHECK(std::sqrt(mnorm2(s.mass, d)) <= 1e-8 * std::sqrt(mnorm2(s.mass, exact.coefficients.col(i))));
    }
  }
}

TEST_CASE("rational potential: online basis is close for snapshot parameters") {
  // H = 1/16 on [-1, 1]
  auto s = rational_potential(32, 2048, 64, Box{{-1.0, 0.0}, {1.0, 0.0}});
  auto rule = make_lattice_rule(53, cbc_generating_vector(53, 64, product_weights(64)), 1, 7);
  auto pts = lattice_points(rule, 0);
  pts.resize(50);
  auto model = build_pod_model(s.op, s.constraint, s.alpha, s.mass, pts, PodOptions{});
  for (std::size_t j : {0u, 17u, 49u}) {
    auto exact = build_basis(s.op, pts[j], s.constraint, s.alpha);
    Matrix approx = online_basis(model.pods, model.tensors, pts[j]);
    for (Index i : {0, 5, 11, 31}) {
      Vector d = exact.coefficients.col(i) - approx.col(i);
      CHECK(std::sqrt(mnorm2(s.mass, d)) <= 1e-2 * std::sqrt(mnorm2(s.mass, exact.coefficients.col(i))));
    }
  }
}

TEST_CASE("deterministic potential: POD equals MsFEM") {
  auto s = rational_potential(8, 256, 0);
  std::vector<std::vector<double>> pts(3);
  auto model = build_pod_model(s.op, s.constraint, s.alpha, s.mass, pts, PodOptions{});
  auto basis = build_basis(s.op, {}, s.constraint, s.alpha);
  auto direct = reduced_evp(basis, s.op, {}, s.mass, 3);
  auto pod = reduced_evp_pod(online_basis(model.pods, model.tensors, {}), s.op, {}, s.mass, 3);
  for (Index k = 0; k < 3; ++k) CHECK(std::abs(direct.fine.values[k] - pod.fine.values[k]) < 1e-10);
}

TEST_CASE("POD eigenvalues bound fine eigenvalues from above") {
  auto s = rational_potential(8, 256, 6);
  auto pts = mc_points(1, 15, 6);
  auto model = build_pod_model(s.op, s.constraint, s.alpha, s.mass, pts, PodOptions{});
  auto test_pts = mc_points(2, 5, 6);
  for (const auto& w : test_pts) {
    auto pod = reduced_evp_pod(online_basis(model.pods, model.tensors, w), s.op, w, s.mass, 3);
    auto fine = sparse_smallest_gevp(s.op.materialize(w), s.mass, 3);
    for (Index k = 0; k < 3; ++k) CHECK(pod.fine.values[k] >= fine.values[k] - 1e-10);
  }
}
