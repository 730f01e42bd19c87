#include <gtest/gtest.h>

#include <cmath>

#include "srbeam/baselines.hpp"
#include "test_util.hpp"

using namespace srbeam;
using baselines::MrtTarget;

namespace {

model::ChannelSet random_channels(std::mt19937_64& rng, int n = 2) {
  return model::ChannelSet(tu::random_cmat(rng, n, n), tu::random_cmat(rng, n, n), tu::random_cmat(rng, n, n));
}

}  // namespace

TEST(Mrt, DiagonalChannelGivesIdentity) {
  CMat G = CMat::Zero(2, 2);
  G(0, 0) = 3.0;
  G(1, 1) = 1.0;
  const model::ChannelSet ch(G, CMat::Identity(2, 2), CMat::Identity(2, 2));
  const auto bf = baselines::mrt_beamformer(ch, 2.0, {MrtTarget::G});
  EXPECT_LE(tu::max_abs(bf.P - CMat::Identity(2, 2)), 1e-12);
}

TEST(Mrt, ZeroBudgetGivesZero) {
  std::mt19937_64 rng(1);
  const auto ch = random_channels(rng);
  EXPECT_EQ(baselines::mrt_beamformer(ch, 0.0, {MrtTarget::H}).P.norm(), 0.0);
}

TEST(Mrt, UsesFullBudget) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto ch = random_channels(rng, 1 + k % 4);
    const double b = 0.1 + 10.0 * (k % 7);
    for (auto t : {MrtTarget::G, MrtTarget::H})
      EXPECT_NEAR(baselines::mrt_beamformer(ch, b, {t}).power(), b, 1e-10 * b);
  }
}

TEST(Mrt, DegenerateTargetThrows) {
  const model::ChannelSet ch(CMat::Zero(2, 2), CMat::Identity(2, 2), CMat::Identity(2, 2));
  try {
    baselines::mrt_beamformer(ch, 1.0, {MrtTarget::G});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateChannel);
  }
  const auto ev = baselines::evaluate_baseline({ch, 1.0, 0.0}, {MrtTarget::G});
  EXPECT_NEAR(ev.beamformer.power(), 1.0, 1e-12);
}

// With equal power on a full unitary basis, P P^H = (budget / N_t) I for both
// targets: the primary signal Gram is target independent and the two schemes
// differ only through the backscatter term D = H P 1.
TEST(Mrt, EqualPowerGramIsTargetIndependent) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const auto ch = random_channels(rng);
    const auto g = baselines::mrt_beamformer(ch, 10.0, {MrtTarget::G});
    const auto h = baselines::mrt_beamformer(ch, 10.0, {MrtTarget::H});
    EXPECT_LE(tu::max_abs(g.P * g.P.adjoint() - 5.0 * CMat::Identity(2, 2)), 1e-12);
    EXPECT_LE(tu::max_abs(h.P * h.P.adjoint() - 5.0 * CMat::Identity(2, 2)), 1e-12);
    const model::ChannelSet nof(ch.G(), ch.H(), CMat::Zero(2, 2));
    EXPECT_NEAR(model::rate_primary(nof, g.P), model::rate_primary(nof, h.P), 1e-12);
  }
}

// U G has the same right singular vectors as G, so the beamformer is unchanged
// up to the SVD phase convention; the Gram P P^H is invariant.
TEST(Mrt, InvariantUnderLeftUnitary) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto ch = random_channels(rng);
    const Eigen::HouseholderQR<CMat> qr(tu::random_cmat(rng, 2, 2));
    const CMat U = qr.householderQ();
    const model::ChannelSet rot(U * ch.G(), ch.H(), ch.F());
    const CMat a = baselines::mrt_beamformer(ch, 5.0, {MrtTarget::G}).P;
    const CMat b = baselines::mrt_beamformer(rot, 5.0, {MrtTarget::G}).P;
    EXPECT_LE(tu::max_abs(a * a.adjoint() - b * b.adjoint()), 1e-9);
  }
}

TEST(Evaluate, FlagsAndRates) {
  std::mt19937_64 rng(5);
  const auto ch = random_channels(rng);
  const auto e0 = baselines::evaluate_baseline({ch, 10.0, 0.0}, {MrtTarget::H});
  EXPECT_TRUE(e0.rt_satisfied);
  EXPECT_NEAR(e0.r_b, model::rate_secondary(ch, e0.beamformer.P), 1e-12);
  EXPECT_NEAR(e0.r_t_achieved, model::rate_primary(ch, e0.beamformer.P), 1e-12);

  const auto big = baselines::evaluate_baseline({ch, 10.0, 1e3}, {MrtTarget::G});
  EXPECT_FALSE(big.rt_satisfied);

  const model::ChannelSet nof(ch.G(), ch.H(), CMat::Zero(2, 2));
  EXPECT_EQ(baselines::evaluate_baseline({nof, 10.0, 0.0}, {MrtTarget::H}).r_b, 0.0);
}

TEST(Waterfill, BeatsMrtOnPrimaryRateWithoutBackscatter) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 100; ++k) {
    const CMat G = tu::random_cmat(rng, 2, 2);
    const model::ChannelSet ch(G, CMat::Zero(2, 2), CMat::Zero(2, 2));
    const double b = 0.5 + k % 10;
    const auto wf = baselines::waterfill_beamformer(G, b);
    EXPECT_LE(wf.power(), b * (1 + 1e-12));
    const double base = model::rate_primary(ch, baselines::mrt_beamformer(ch, b, {MrtTarget::G}).P);
    EXPECT_GE(model::rate_primary(ch, wf.P), base - 1e-10);
    // Random feasible beamformers never beat water-filling.
    CMat P = tu::random_cmat(rng, 2, 2);
    P *= std::sqrt(b) / P.norm();
    EXPECT_GE(model::rate_primary(ch, wf.P), model::rate_primary(ch, P) - 1e-10);
  }
}
