#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "tfm/audit.hpp"
#include "tfm/error.hpp"

using namespace tfm;

namespace {

Mempool five_tx_mempool()
{
  return Mempool({{0, 10, 10, 10}, {1, 10, 10, 10}, {2, 10, 5, 5}, {3, 10, 0, 0}, {4, 10, 0, 0}});
}

Mempool unit_bids(std::vector<double> const &bids)
{
  std::vector<Transaction> txs;
  for (std::size_t i = 0; i < bids.size(); ++i)
    txs.push_back({i, 1.0, bids[i], bids[i]});
  return Mempool(std::move(txs));
}

}  // namespace

TEST(Zti, OptimalAllocationCertificate)
{
  auto r = estimate_zti(MechanismSpec::fpa(), five_tx_mempool(), 30, 100, 1);
  EXPECT_EQ(r.verdict, Verdict::Violated);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->tx, 3u);
}

TEST(Zti, PostedPriceCertificate)
{
  auto r = estimate_zti(MechanismSpec::eip1559(1), unit_bids({3, 2, 0}), 5, 100, 1);
  EXPECT_EQ(r.verdict, Verdict::Violated);
  EXPECT_EQ(r.trials, 0u);
}

TEST(Zti, SoftmaxIncludesZeroFee)
{
  auto r = estimate_zti(MechanismSpec::stfm(1), unit_bids({3, 2, 0, 1, 0}), 2, 10000, 1);
  EXPECT_EQ(r.verdict, Verdict::Satisfied) << r.note;
}

TEST(Zti, RtfmIncludesZeroFee)
{
  auto r = estimate_zti(MechanismSpec::rtfm(0.5), five_tx_mempool(), 30, 10000, 1);
  EXPECT_EQ(r.verdict, Verdict::Satisfied) << r.note;
}

TEST(Zti, NeedsZeroBid)
{
  EXPECT_THROW(estimate_zti(MechanismSpec::fpa(), unit_bids({1, 2}), 1, 10, 1), PreconditionError);
  EXPECT_THROW(estimate_zti(MechanismSpec::fpa(), unit_bids({0}), 1, 0, 1), ParameterError);
}

TEST(Monotonicity, UniformViolates)
{
  std::vector<double> eps{1.0};
  auto r = estimate_monotonicity(MechanismSpec::uniform(), unit_bids({1, 2, 3, 4}), 2, 0, eps, 2000, 3);
  EXPECT_EQ(r.verdict, Verdict::Violated);
}

TEST(Monotonicity, SoftmaxEqualSizes)
{
  std::vector<double> eps{0.5, 1.0};
  auto r = estimate_monotonicity(MechanismSpec::stfm(1), unit_bids({1, 2, 3, 0}), 2, 0, eps, 4000, 3);
  EXPECT_EQ(r.verdict, Verdict::Satisfied) << r.note;
}

TEST(Monotonicity, Rtfm)
{
  std::vector<double> eps{0.5, 1.0};
  auto r = estimate_monotonicity(MechanismSpec::rtfm(0.3), five_tx_mempool(), 30, 2, eps, 1000, 3);
  EXPECT_EQ(r.verdict, Verdict::Satisfied);
}

TEST(Uic, FirstPriceViolated)
{
  Mempool             m({{0, 1, 5, 5}, {1, 1, 2, 2}});
  std::vector<double> grid{3, 4, 5};
  auto                r = check_uic(MechanismSpec::fpa(), m, 1, 0, grid, 10, 1);
  EXPECT_EQ(r.verdict, Verdict::Violated);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->bid, 3.0);
  EXPECT_DOUBLE_EQ(r.witness->deviating, 2.0);
  EXPECT_DOUBLE_EQ(r.witness->honest, 0.0);
}

TEST(Uic, GridMustContainValuation)
{
  Mempool             m({{0, 1, 5, 5}});
  std::vector<double> grid{3, 4};
  EXPECT_THROW(check_uic(MechanismSpec::fpa(), m, 1, 0, grid, 10, 1), PreconditionError);
}

TEST(Uic, RtfmPostedPriceMatchesUnderlying)
{
  Mempool             m({{0, 1, 5, 5}, {1, 1, 4, 4}, {2, 1, 3, 3}});
  std::vector<double> grid{2, 3, 4, 5};
  auto                base = check_uic(MechanismSpec::eip1559(2), m, 2, 0, grid, 200, 1);
  auto                spec = MechanismSpec::rtfm(0.5);
  spec.payment             = PaymentRule::PostedPrice;
  spec.burning             = BurnRule::PostedPrice;
  spec.lambda              = 2;
  auto r                   = check_uic(spec, m, 2, 0, grid, 4000, 1);
  EXPECT_EQ(r.verdict, base.verdict) << r.note << " vs " << base.note;
}

TEST(Mic, BitcoinFTwoFakes)
{
  auto                m = unit_bids({5, 5, 5, 5, 5});
  std::vector<double> grid{0};
  auto r = search_mic_deviation(MechanismSpec::bitcoinf(0.75, 1), m, 8, 2, grid, 1, {500, 1.0});
  EXPECT_EQ(r.verdict, Verdict::Violated) << r.note;
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->fakes.size(), 2u);
  EXPECT_NEAR(r.witness->deviating - r.witness->honest, 8.0, 1e-9);
}

TEST(Mic, FirstPriceOptimalSatisfied)
{
  auto                m = five_tx_mempool();
  std::vector<double> grid{0, 5, 10};
  auto                r = search_mic_deviation(MechanismSpec::fpa(), m, 30, 2, grid, 1);
  EXPECT_EQ(r.verdict, Verdict::Satisfied) << r.note;
}

TEST(Mic, RtfmSatisfied)
{
  auto                m = five_tx_mempool();
  std::vector<double> grid{0, 5, 10};
  auto                r = search_mic_deviation(MechanismSpec::rtfm(0.3), m, 30, 2, grid, 1);
  EXPECT_EQ(r.verdict, Verdict::Satisfied) << r.note;
}

TEST(Mic, SoftmaxPrefersGreedySet)
{
  auto                m = unit_bids({5, 4, 3, 2, 1, 0, 0});
  std::vector<double> grid{0};
  auto                r = search_mic_deviation(MechanismSpec::stfm(1), m, 3, 0, grid, 1, {2000, 1.0});
  EXPECT_EQ(r.verdict, Verdict::Violated);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_TRUE(r.witness->fakes.empty());
  EXPECT_DOUBLE_EQ(r.witness->deviating, 12.0);
}

TEST(Mic, Limits)
{
  auto                m = unit_bids({1});
  std::vector<double> grid{0};
  EXPECT_THROW(search_mic_deviation(MechanismSpec::fpa(), m, 1, 5, grid, 1), LimitError);
  std::vector<double> wide{0, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_THROW(search_mic_deviation(MechanismSpec::fpa(), m, 1, 1, wide, 1), LimitError);
}

TEST(Cof, ClosedForms)
{
  EXPECT_NEAR(stfm_cof_bound(100, 10, 2, 1), 11.0 - std::exp(-2.0), 1e-12);
  EXPECT_NEAR(stfm_cof_bound(100, 10, 2, 1), 10.8647, 1e-4);
  EXPECT_DOUBLE_EQ(stfm_cof_bound(1000, 100, std::numeric_limits<double>::infinity(), 1), 11.0);
  EXPECT_DOUBLE_EQ(stfm_cof_bound(7, 7, 0, 1), 1.0);
  EXPECT_THROW(stfm_cof_bound(5, 6, 1, 1), DomainError);
  EXPECT_DOUBLE_EQ(bitcoinzf_cof_bound(0.25), 4.0);
  EXPECT_DOUBLE_EQ(rtfm_cof(0.5), 2.0);
  EXPECT_DOUBLE_EQ(rtfm_cov(0.5), 1.0);
  EXPECT_DOUBLE_EQ(rtfm_cov(0.2), 2.0);
  EXPECT_NEAR(rtfm_cov(1.0 - 1e-12), 0.0, 1e-5);
  EXPECT_DOUBLE_EQ(rtfm_cov_ratio(0.5), 1.0);
  EXPECT_LT(rtfm_cov_ratio(0.2), rtfm_cov_ratio(0.8));
}

TEST(Cof, Empirical)
{
  auto fpa = empirical_cof(MechanismSpec::fpa(), five_tx_mempool(), 30, 10, 1);
  EXPECT_DOUBLE_EQ(fpa.cof, 1.0);

  auto zf = empirical_cof(MechanismSpec::bitcoinzf(0.5), unit_bids({3, 3, 3, 3, 3, 3}), 4, 10, 1);
  EXPECT_DOUBLE_EQ(zf.cof, 2.0);

  auto rt = empirical_cof(MechanismSpec::rtfm(0.5), five_tx_mempool(), 30, 10000, 1);
  EXPECT_NEAR(rt.cof, 2.0, 0.1);
  ASSERT_TRUE(rt.closed_form.has_value());
  EXPECT_DOUBLE_EQ(*rt.closed_form, 2.0);

  EXPECT_THROW(empirical_cof(MechanismSpec::fpa(), unit_bids({0, 0}), 1, 10, 1), DegenerateInstanceError);
}

TEST(Gamma, Tuning)
{
  std::vector<double> bids(10, 5.0);
  bids.resize(20, 0.0);
  auto m = unit_bids(bids);
  EXPECT_DOUBLE_EQ(tune_gamma(m, 10, 0.2, std::numeric_limits<double>::infinity(), 0.1, 50, 100, 1), 0.1);
  double loose = tune_gamma(m, 10, 0.2, 2.0, 0.1, 50, 2000, 1);
  double tight = tune_gamma(m, 10, 0.2, 1.0, 0.1, 50, 2000, 1);
  EXPECT_GT(loose, 0.1);
  EXPECT_LE(loose, tight);
  EXPECT_THROW(tune_gamma(m, 10, 0.9, 0.001, 0.1, 0.2, 500, 1), InfeasibleError);
}

TEST(Report, Serialization)
{
  auto r = estimate_zti(MechanismSpec::fpa(), five_tx_mempool(), 30, 100, 1);
  EXPECT_EQ(PropertyReport::csv_header(), "property,verdict,trials,witness,note");
  auto text = r.to_text();
  EXPECT_NE(text.find("verdict=violated"), std::string::npos) << text;
  auto row = r.to_csv_row();
  EXPECT_EQ(row.rfind("zti,violated,", 0), 0u) << row;
}
