// Copyright 2026 The TDPM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tdpm/errors.hpp"
#include "tdpm/losses.hpp"
#include "test_util.hpp"

using namespace tdpm;
using namespace tdpm::tu;
using ad::Tensor;

namespace {

bool has_nonzero_grad(const ParamSet& p) {
  for (const auto& [_, t] : p) {
    for (double g : t.grad()) {
      if (g != 0.0) return true;
    }
  }
  return false;
}

EpsPredictor constant_predictor(double a, double b) {
  return [a, b](const Tensor& x, std::span<const int>) {
    std::vector<double> v;
    for (std::size_t i = 0; i < x.size(0); ++i) {
      v.push_back(a);
      v.push_back(b);
    }
    return Tensor::from({x.size(0), 2}, v);
  };
}

}  // namespace

TEST(LossSimple, OraclePredictorGivesZero) {
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  Rng rng(1);
  const Tensor x0 = rand_tensor({32, 2}, rng, false, 3.0);
  const Tensor eps = rand_tensor({32, 2}, rng, false);
  std::vector<int> t(32);
  for (auto& v : t) v = 1 + static_cast<int>(rng.index(5));
  const EpsPredictor oracle = [&](const Tensor&, std::span<const int>) { return eps; };
  EXPECT_EQ(denoising_loss(oracle, x0, t, eps, s).item(), 0.0);
}

TEST(LossSimple, ZeroPredictorExpectsDataDimension) {
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  Rng rng(2);
  const std::size_t n = 40000;
  const Tensor x0 = rand_tensor({n, 2}, rng, false);
  const double loss = loss_simple_trunc(constant_predictor(0, 0), x0, s, 4, rng).item();
  // ||eps||^2 ~ chi^2_2 has variance 4.
  EXPECT_NEAR(loss, 2.0, 5.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST(LossSimple, SingleFixedTripleHandComputed) {
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  const Tensor x0 = Tensor::from({1, 2}, {1.0, 2.0});
  const Tensor eps = Tensor::from({1, 2}, {0.5, -1.0});
  const std::vector<int> t{2};
  std::vector<double> seen;
  const EpsPredictor pred = [&](const Tensor& xt, std::span<const int> ts) {
    seen = to_vec(xt);
    EXPECT_EQ(ts[0], 2);
    return Tensor::from({1, 2}, {0.1, 0.2});
  };
  EXPECT_NEAR(denoising_loss(pred, x0, t, eps, s).item(), 0.4 * 0.4 + 1.2 * 1.2, 1e-15);
  const double ab = s.alpha_bar(2);
  EXPECT_NEAR(seen[0], std::sqrt(ab) * 1.0 + std::sqrt(1 - ab) * 0.5, 1e-15);
  EXPECT_NEAR(seen[1], std::sqrt(ab) * 2.0 - std::sqrt(1 - ab) * 1.0, 1e-15);
}

TEST(LossSimple, TruncZeroIsContractError) {
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  Rng rng(0);
  EXPECT_THROW(loss_simple_trunc(constant_predictor(0, 0), Tensor::zeros({2, 2}), s, 0, rng), ContractError);
  EXPECT_THROW(loss_simple_trunc(constant_predictor(0, 0), Tensor::zeros({2, 2}), s, 6, rng), ContractError);
}

TEST(LossSimple, TimeStepsCoverOnlyTruncatedRange) {
  const auto s = NoiseSchedule::linear(10, 0.01, 0.2);
  Rng rng(3);
  std::vector<int> seen(11, 0);
  const EpsPredictor spy = [&](const Tensor& x, std::span<const int> t) {
    for (int v : t) ++seen[static_cast<std::size_t>(v)];
    return Tensor::zeros({x.size(0), 2});
  };
  loss_simple_trunc(spy, Tensor::zeros({5000, 2}), s, 4, rng);
  EXPECT_EQ(seen[0], 0);
  for (int t = 1; t <= 4; ++t) EXPECT_NEAR(seen[t], 1250, 4 * std::sqrt(5000 * 0.25 * 0.75));
  for (int t = 5; t <= 10; ++t) EXPECT_EQ(seen[t], 0);
}

TEST(Diffuse, ForwardMarginalMoments) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 0.02);
  Rng rng(4);
  const std::size_t n = 100000;
  for (int t : {1, 37, 500, 1000}) {
    std::vector<double> x0v;
    for (std::size_t i = 0; i < n; ++i) {
      x0v.push_back(3.0);
      x0v.push_back(-1.5);
    }
    const Tensor xt = diffuse(Tensor::from({n, 2}, x0v), s, t, rng);
    const double ab = s.alpha_bar(t), var = 1 - ab;
    for (int c = 0; c < 2; ++c) {
      double m = 0, m2 = 0;
      for (std::size_t i = 0; i < n; ++i) m += xt.at(i, c);
      m /= n;
      for (std::size_t i = 0; i < n; ++i) m2 += (xt.at(i, c) - m) * (xt.at(i, c) - m);
      m2 /= n - 1;
      const double mu = std::sqrt(ab) * x0v[c];
      EXPECT_NEAR(m, mu, 3.0 * std::sqrt(var / n)) << t;
      EXPECT_NEAR(m2, var, 3.0 * var * std::sqrt(2.0 / (n - 1))) << t;
    }
  }
  const Tensor x0 = Tensor::from({1, 2}, {1.0, 2.0});
  EXPECT_EQ(to_vec(diffuse(x0, s, 0, rng)), to_vec(x0));
}

TEST(Gan, LogitZeroValues) {
  const Tensor zero = Tensor::zeros({8});
  EXPECT_NEAR(gan_discriminator_loss(zero, zero).item(), 2 * std::log(2.0), 1e-15);
  EXPECT_NEAR(gan_generator_loss(zero, GeneratorLoss::kNonSaturating).item(), std::log(2.0), 1e-15);
  EXPECT_NEAR(gan_generator_loss(zero, GeneratorLoss::kMinimax).item(), -std::log(2.0), 1e-15);
}

TEST(Gan, StableAtExtremeLogits) {
  const Tensor big = Tensor::from({2}, {-1000.0, 1000.0});
  const double d = gan_discriminator_loss(big, big).item();
  EXPECT_TRUE(std::isfinite(d));
  EXPECT_GE(d, 0.0);
  EXPECT_NEAR(d, 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(gan_generator_loss(big, GeneratorLoss::kNonSaturating).item()));
}

TEST(Gan, DiscriminatorLossNonNegative) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Tensor r = rand_tensor({16}, rng, false, 10.0), f = rand_tensor({16}, rng, false, 10.0);
    EXPECT_GE(gan_discriminator_loss(r, f).item(), 0.0);
  }
}

TEST(Gan, GradientsMatchFiniteDifferences) {
  Rng rng(6);
  Tensor r = rand_tensor({7}, rng), f = rand_tensor({7}, rng);
  EXPECT_LT(check_gradients([&] { return gan_discriminator_loss(r, f); }, {r, f}).worst, 1e-4);
  EXPECT_LT(check_gradients([&] { return gan_generator_loss(f, GeneratorLoss::kNonSaturating); }, {f}).worst, 1e-4);
  EXPECT_LT(check_gradients([&] { return gan_generator_loss(f, GeneratorLoss::kMinimax); }, {f}).worst, 1e-4);
}

TEST(Gan, ParameterPartition) {
  TimeEmbedMlp gen("gen", 0, 1, 16);
  Critic disc("disc", 2, 2, 16);
  Rng rng(7);
  const Tensor z = rand_tensor({12, 2}, rng, false);
  const Tensor real = rand_tensor({12, 2}, rng, false);

  // Discriminator side: fake is detached, so only phi moves.
  {
    const GanLosses l = loss_gan(disc, real, generate_prior_separate(gen, z), GeneratorLoss::kNonSaturating);
    l.discriminator.backward();
    EXPECT_TRUE(has_nonzero_grad(disc.params()));
    EXPECT_FALSE(has_nonzero_grad(gen.params()));
    disc.params().zero_grad();
  }
  // Generator side with phi frozen: only psi moves.
  {
    disc.params().set_requires_grad(false);
    const GanLosses l = loss_gan(disc, real, generate_prior_separate(gen, z), GeneratorLoss::kNonSaturating);
    l.generator.backward();
    EXPECT_TRUE(has_nonzero_grad(gen.params()));
    EXPECT_FALSE(has_nonzero_grad(disc.params()));
    disc.params().set_requires_grad(true);
    gen.params().zero_grad();
  }
  // Fake batch independent of psi: no gradient reaches psi.
  {
    const GanLosses l = loss_gan(disc, real, rand_tensor({12, 2}, rng, false), GeneratorLoss::kNonSaturating);
    l.generator.backward();
    EXPECT_FALSE(has_nonzero_grad(gen.params()));
  }
}

TEST(Gan, DenoiserLossTouchesOnlyTheta) {
  TimeEmbedMlp model("eps", 5, 1, 16);
  Critic disc("disc", 2, 2, 16);
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  Rng rng(8);
  loss_simple_trunc(as_predictor(model), rand_tensor({10, 2}, rng, false), s, 4, rng).backward();
  EXPECT_TRUE(has_nonzero_grad(model.params()));
  EXPECT_FALSE(has_nonzero_grad(disc.params()));
}

TEST(Ct, SinglePairIsTwiceCost) {
  const Critic c("crit", 3, 2, 16);
  const Navigator nav("nav", 4, 8);
  const Tensor r = Tensor::from({1, 2}, {1.0, -2.0}), f = Tensor::from({1, 2}, {-0.5, 3.0});
  for (bool norm : {true, false}) {
    const CtLoss l = loss_ct(c, nav, r, f, norm);
    EXPECT_NEAR(l.transport.item(), 2.0 * l.cost.item(), 1e-14);
    EXPECT_NEAR(l.cost.item(), critic_cost(c, r, f, norm).item(), 1e-15);
  }
}

TEST(Ct, HardAssignmentsMatchPermutationOracle) {
  Rng rng(9);
  for (std::size_t m = 1; m <= 4; ++m) {
    // Well separated points, cost = squared distance, zero on the diagonal.
    std::vector<double> pts;
    for (std::size_t i = 0; i < m; ++i) {
      pts.push_back(4.0 * static_cast<double>(i) + 0.1 * rng.normal());
      pts.push_back(0.1 * rng.normal());
    }
    const Tensor x = Tensor::from({m, 2}, pts);
    const Tensor cost = ad::pairwise_sq_dist(x, x);
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    double best = 1e300;
    do {
      std::vector<double> sc(m * m, 0.0);
      double oracle = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        sc[i * m + perm[i]] = 200.0;
        oracle += cost.at(i, perm[i]);
      }
      oracle = 2.0 * oracle / static_cast<double>(m);
      best = std::min(best, oracle);
      const double got = ct_transport(cost, Tensor::from({m, m}, sc)).item();
      EXPECT_NEAR(got, oracle, 1e-6 * std::max(1.0, oracle));
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(best, 0.0);
    // Navigator preferring low cost approaches the diagonal optimum and no
    // soft plan beats it.
    const double greedy = ct_transport(cost, ad::scale(cost, -50.0)).item();
    EXPECT_LT(greedy, 1e-6);
    for (int trial = 0; trial < 20; ++trial) {
      EXPECT_GE(ct_transport(cost, rand_tensor({m, m}, rng, false, 3.0)).item(), best);
    }
  }
}

TEST(Ct, SwapSymmetry) {
  const Critic c("crit", 3, 2, 16);
  const Navigator nav("nav", 4, 8);
  Rng rng(10);
  const Tensor r = rand_tensor({5, 2}, rng, false, 3.0), f = rand_tensor({3, 2}, rng, false, 3.0);
  for (bool norm : {true, false}) {
    EXPECT_NEAR(loss_ct(c, nav, r, f, norm).transport.item(), loss_ct(c, nav, f, r, norm).transport.item(),
                1e-12);
  }
}

TEST(Ct, GradientsMatchFiniteDifferences) {
  const Critic c("crit", 3, 2, 8);
  const Navigator nav("nav", 4, 8);
  Rng rng(11);
  Tensor r = rand_tensor({4, 2}, rng), f = rand_tensor({3, 2}, rng);
  std::vector<Tensor> leaves{r, f};
  for (const auto& [_, t] : c.params()) leaves.push_back(t);
  for (const auto& [_, t] : nav.params()) leaves.push_back(t);
  const GradCheck g = check_gradients([&] { return loss_ct(c, nav, r, f, true).transport; }, leaves, 30, 2);
  EXPECT_LT(g.worst, 1e-4);
}

TEST(Ct, ShapeAndEmptyErrors) {
  EXPECT_THROW(ct_transport(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), ShapeError);
  const Critic c("crit", 3, 2, 8);
  const Navigator nav("nav", 4, 8);
  EXPECT_THROW(loss_ct(c, nav, Tensor::zeros({0, 2}), Tensor::zeros({1, 2})), ContractError);
}

TEST(Combined, SumsParts) {
  EXPECT_DOUBLE_EQ(combined_tdpm_loss(0.5, 0.25, 0.0).total, 0.75);
  EXPECT_DOUBLE_EQ(combined_tdpm_loss(0.5, 0.0, 1.0).total, 0.5);
  EXPECT_DOUBLE_EQ(combined_tdpm_loss(0.5, 0.25, 0.0, 2.0).total, 1.0);
  const LossReport r = combined_tdpm_loss(std::nullopt, 0.3, 0.7);
  EXPECT_FALSE(r.simple.has_value());
  EXPECT_DOUBLE_EQ(r.total, 0.3);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.normal(), g = rng.normal(), lam = rng.uniform(0, 3);
    EXPECT_EQ(combined_tdpm_loss(s, g, 0, lam).total, s + lam * g);
  }
}

TEST(Combined, LogRowFormat) {
  EXPECT_EQ(loss_log_header(), "iter,loss_simple,loss_prior_g,loss_prior_d,loss_total");
  EXPECT_EQ(loss_log_row(3, combined_tdpm_loss(0.5, 0.25, 1.5)), "3,0.5,0.25,1.5,0.75");
  EXPECT_EQ(loss_log_row(4, combined_tdpm_loss(std::nullopt, 0.25, 1.5)), "4,,0.25,1.5,0.25");
}

TEST(Elbo, PriorKlFullChainNearZeroShortChainLarge) {
  const auto full = NoiseSchedule::linear(1000, 1e-4, 0.02);
  const auto shortc = NoiseSchedule::linear(5, 0.05, 0.5);
  for (double v : {-10.0, 0.0, 10.0}) {
    EXPECT_LT(prior_kl(Tensor::from({1, 2}, {v, v}), full, 1000), 1e-2);
  }
  EXPECT_GT(prior_kl(Tensor::from({1, 2}, {9.0, 9.0}), shortc, 5), 1.0);
  // Closed form for one coordinate pair.
  const double ab = shortc.alpha_bar(5);
  const double expect = 2 * 0.5 * ((1 - ab) + ab * 81 - 1 - std::log(1 - ab));
  EXPECT_NEAR(prior_kl(Tensor::from({1, 2}, {9.0, 9.0}), shortc, 5), expect, 1e-12);
}

TEST(Elbo, PerfectDenoiserOnOnePointDataset) {
  const auto s = NoiseSchedule::linear(5, 0.05, 0.5);
  const std::vector<double> point{2.0, -3.0};
  const std::size_t b = 64;
  std::vector<double> x0v;
  for (std::size_t i = 0; i < b; ++i) x0v.insert(x0v.end(), point.begin(), point.end());
  const Tensor x0 = Tensor::from({b, 2}, x0v);
  const EpsPredictor perfect = [&](const Tensor& xt, std::span<const int> t) {
    std::vector<double> out(xt.numel());
    for (std::size_t i = 0; i < xt.size(0); ++i) {
      const double ab = s.alpha_bar(t[i]);
      for (int c = 0; c < 2; ++c) out[2 * i + c] = (xt.at(i, c) - std::sqrt(ab) * point[c]) / std::sqrt(1 - ab);
    }
    return Tensor::from(xt.shape(), out);
  };
  Rng rng(3);
  const ElboTerms e = elbo_diagnostics(perfect, x0, s, 5, rng);
  ASSERT_EQ(e.l_prev.size(), 4u);
  for (double l : e.l_prev) EXPECT_LT(l, 1e-20);
  EXPECT_NEAR(e.l0, std::log(2 * std::numbers::pi * s.beta(1)), 1e-9);
  EXPECT_NEAR(e.lT, prior_kl(x0, s, 5), 1e-15);

  const ElboTerms bad = elbo_diagnostics(constant_predictor(0, 0), x0, s, 5, rng);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_GT(bad.l_prev[i], e.l_prev[i]);
  EXPECT_THROW(elbo_diagnostics(perfect, x0, s, 6, rng), ContractError);
}
