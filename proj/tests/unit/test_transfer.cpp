#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <fareyphase/transfer.hpp>

#include "oracles.hpp"

using namespace fareyphase;

TEST(Binomial, Examples) {
  EXPECT_EQ(gen_binomial(2.5, -1), 0.0);
  EXPECT_EQ(gen_binomial(-3.0, 2), 6.0);
  EXPECT_EQ(gen_binomial(0.7, 0), 1.0);
  EXPECT_EQ(gen_binomial(5.0, 2), 10.0);
  EXPECT_EQ(gen_binomial(3.0, 5), 0.0);
  for (double a : {-2.4, -1.0, 0.3, 7.5})
    for (long b = 0; b < 30; ++b)
      EXPECT_NEAR(gen_binomial(a, b), oracle::binomial(a, b),
                  1e-13 * std::max(1.0, std::abs(oracle::binomial(a, b))));
}

TEST(Matrix, EntryExamples) {
  for (double b : {0.0, 0.3, 0.5, 0.9})
    EXPECT_NEAR(transfer_entry_direct(b, 0, 0), std::pow(2.0, 1.0 - 2.0 * b), 1e-15);
  EXPECT_NEAR(transfer_entry_direct(0.5, 0, 1), 0.5, 1e-15);
  EXPECT_EQ(transfer_entry_direct(0.0, 0, 0), 2.0);
  const auto C = build_matrix(0.5, 8);
  EXPECT_NEAR(C.entries(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(C.entries(0, 1), 0.5, 1e-15);
}

TEST(Matrix, RecurrenceMatchesClosedFormAtSmallIndices) {
  for (double b : {0.1, 0.5, 0.77, 0.95}) {
    const auto C = build_matrix(b, 20);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        ASSERT_NEAR(C.entries(i, j), transfer_entry_direct(b, i, j), 1e-12)
            << "b=" << b << " i=" << i << " j=" << j;
  }
}

TEST(Matrix, Validation) {
  EXPECT_THROW(build_matrix(0.5, 1), domain_error);
  EXPECT_THROW(build_matrix(0.5, 4097), domain_error);
  EXPECT_THROW(build_matrix(NAN, 8), domain_error);
  EXPECT_EQ(build_matrix(0.5, 16).dim(), 16);
}

TEST(Eigen, SmallMatrixAgainstOraclePowerIteration) {
  for (double b : {0.25, 0.5, 0.75}) {
    std::vector<std::vector<double>> A(24, std::vector<double>(24));
    for (int i = 0; i < 24; ++i)
      for (int j = 0; j < 24; ++j)
        A[i][j] = transfer_entry_direct(b, i, j);
    const long double want = oracle::power_lambda(A, 3000);
    const auto r = leading_eigen(build_matrix(b, 24));
    EXPECT_NEAR(r.lambda, static_cast<double>(want), 1e-10) << "b=" << b;
  }
}

TEST(Eigen, PostConditions) {
  for (double b : {0.1, 0.5, 0.9}) {
    SpectralOptions opts;
    const auto r = leading_eigen(build_matrix(b, 256), opts);
    EXPECT_LE(r.residual, opts.tol);
    EXPECT_GT(r.lambda, 1.0);
    EXPECT_EQ(r.dim, 256);
    EXPECT_TRUE(is_perron_vector(r.eigvec));
    double n2 = 0.0;
    for (double x : r.eigvec)
      n2 += x * x;
    EXPECT_NEAR(n2, 1.0, 1e-12);
  }
}

TEST(Eigen, MethodsAgree) {
  const auto C = build_matrix(0.6, 128);
  SpectralOptions p;
  p.method = SpectralMethod::power;
  SpectralOptions s;
  s.method = SpectralMethod::shift_invert;
  EXPECT_NEAR(leading_eigen(C, p).lambda, leading_eigen(C, s).lambda, 1e-11);
}

TEST(Eigen, ReferenceValues) {
  // independently computed with a dense LAPACK eigensolver on the same truncation
  EXPECT_NEAR(solve_spectrum(0.5, 256).lambda, 1.3651122767787, 1e-11);
  EXPECT_NEAR(solve_spectrum(0.9, 512).lambda, 1.0472920060209, 1e-11);
}

TEST(Eigen, NearZeroBeta) {
  EXPECT_NEAR(leading_eigen(build_matrix(1e-6, 256)).lambda, 2.0, 1e-3);
}

TEST(Eigen, Errors) {
  EXPECT_THROW(leading_eigen(build_matrix(1.2, 16)), domain_error);
  EXPECT_THROW(leading_eigen(build_matrix(0.0, 16)), domain_error);
  SpectralOptions opts;
  opts.method = SpectralMethod::power;
  opts.max_iter = 3;
  opts.tol = 1e-15;
  try {
    leading_eigen(build_matrix(0.97, 512), opts);
    FAIL() << "expected convergence_error";
  } catch (const convergence_error& e) {
    EXPECT_GT(e.last_residual(), 0.0);
  }
}

TEST(Eigen, MonotoneInBetaAndAboveOne) {
  double prev = 2.0;
  for (double b : {0.05, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95}) {
    const double l = leading_eigen(build_matrix(b, 512)).lambda;
    EXPECT_LT(l, prev);
    EXPECT_GT(l, 1.0);
    prev = l;
  }
}

TEST(Eigen, TruncationCauchy) {
  for (double b : {0.5, 0.9}) {
    const double l1 = leading_eigen(build_matrix(b, 128)).lambda;
    const double l2 = leading_eigen(build_matrix(b, 256)).lambda;
    const double l3 = leading_eigen(build_matrix(b, 512)).lambda;
    EXPECT_LT(std::abs(l3 - l2), std::abs(l2 - l1)) << "b=" << b;
  }
  const double a = leading_eigen(build_matrix(0.99, 256)).lambda;
  const double c = leading_eigen(build_matrix(0.99, 512)).lambda;
  EXPECT_LT(std::abs(c - a), c - 1.0);
}

TEST(Ratio, Examples) {
  EXPECT_EQ(lambda_from_ratio(0.0, 5), 2.0);
  EXPECT_EQ(lambda_from_ratio(0.0, 12), 2.0);
  EXPECT_NEAR(lambda_from_ratio(0.5, 24), lambda_from_ratio(0.5, 22), 1e-4);
  EXPECT_THROW(lambda_from_ratio(0.5, 2), domain_error);
}

TEST(Ratio, AgreesWithMatrix) {
  EXPECT_NEAR(lambda_from_ratio(0.25, 24), leading_eigen(build_matrix(0.25, 256)).lambda, 1e-5);
  EXPECT_NEAR(lambda_from_ratio(0.5, 24), leading_eigen(build_matrix(0.5, 256)).lambda, 1e-5);
}

TEST(Functional, ConvergesToLambda) {
  std::vector<double> e0(256, 0.0);
  e0[0] = 1.0;
  const auto tr = iterate_functional(0.5, 256, 200, e0);
  const double lam = leading_eigen(build_matrix(0.5, 256)).lambda;
  EXPECT_EQ(tr.norm_ratios.size(), 200u);
  EXPECT_NEAR(tr.norm_ratios.back(), lam, 1e-6);

  std::vector<double> ones(256, 1.0);
  const auto other = iterate_functional(0.5, 256, 200, ones);
  for (std::size_t i = 0; i < 256; ++i)
    EXPECT_NEAR(tr.vectors.back()[i], other.vectors.back()[i], 1e-8);

  const auto zero = iterate_functional(0.5, 256, 0, ones);
  ASSERT_EQ(zero.vectors.size(), 1u);
  EXPECT_EQ(zero.vectors[0], ones);
  EXPECT_THROW(iterate_functional(0.5, 256, 3, std::vector<double>(256, 0.0)), domain_error);
}

TEST(Eigenfunction, FixedPointAndShape) {
  const auto r = leading_eigen(build_matrix(0.5, 256));
  EXPECT_EQ(eigenfunction_eval(r, 1.0), r.eigvec[0]);
  double worst = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 10; ++i) {
    const double x = i / 10.0;
    worst = std::max(worst, fixed_point_residual(r, x));
    const double phi = eigenfunction_eval(r, x);
    EXPECT_LT(phi, prev);
    prev = phi;
  }
  EXPECT_LT(worst, 1e-4);
  EXPECT_TRUE(std::isfinite(eigenfunction_eval(r, 0.0)));
  EXPECT_THROW(eigenfunction_eval(r, 1.5), domain_error);
}
