#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tfm/audit.hpp"
#include "tfm/chain.hpp"
#include "tfm/error.hpp"
#include "tfm/experiment.hpp"
#include "tfm/mech.hpp"
#include "tfm/txpool.hpp"

namespace py = pybind11;
using namespace tfm;

namespace {

Hash32 hash_arg(std::string const &hex)
{
  return hex.empty() ? Hash32{} : hash_from_hex(hex);
}

py::dict outcome_dict(MechanismOutcome const &o)
{
  py::dict d;
  d["selected"]         = o.allocation.selected;
  d["total_size"]       = o.allocation.total_size;
  d["payment_per_unit"] = o.payment_per_unit;
  d["burn_per_unit"]    = o.burn_per_unit;
  d["user_utilities"]   = o.user_utilities;
  d["miner_utility"]    = o.miner_utility;
  d["coin_toss"]        = o.coin_toss ? py::cast(*o.coin_toss) : py::none();
  return d;
}

py::dict report_dict(PropertyReport const &r)
{
  py::dict d;
  d["property"] = to_string(r.property);
  d["verdict"]  = to_string(r.verdict);
  d["trials"]   = r.trials;
  d["note"]     = r.note;
  if (r.witness)
  {
    py::dict w;
    w["tx"]        = r.witness->tx ? py::cast(*r.witness->tx) : py::none();
    w["bid"]       = r.witness->bid ? py::cast(*r.witness->bid) : py::none();
    w["honest"]    = r.witness->honest;
    w["deviating"] = r.witness->deviating;
    w["fakes"]     = r.witness->fakes.size();
    w["detail"]    = r.witness->detail;
    d["witness"]   = w;
  }
  else
  {
    d["witness"] = py::none();
  }
  return d;
}

py::list rows_list(std::vector<SweepRow> const &rows)
{
  py::list out;
  for (auto const &r : rows)
  {
    py::dict d;
    d["sweep_value"]           = r.sweep_value;
    d["normalized_revenue"]    = r.normalized_revenue;
    d["revenue_stderr"]        = r.revenue_stderr;
    d["zero_fee_fraction"]     = r.zero_fee_fraction;
    d["zero_payment_fraction"] = r.zero_payment_fraction;
    d["cof"]                   = r.cof;
    d["zfi"]                   = r.zfi;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod)
{
  mod.doc() = "Transaction fee mechanisms: allocation, payments, fairness audits, PoW coin toss";

  static py::exception<Error> base_error(mod, "TfmError", PyExc_RuntimeError);
  static py::exception<ParameterError> parameter_error(mod, "ParameterError", base_error.ptr());
  static py::exception<ConfigError>    config_error(mod, "ConfigError", base_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try
    {
      if (p)
      {
        std::rethrow_exception(p);
      }
    }
    catch (ParameterError const &e)
    {
      py::set_error(parameter_error, e.what());
    }
    catch (ConfigError const &e)
    {
      py::set_error(config_error, e.what());
    }
    catch (Error const &e)
    {
      py::set_error(base_error, e.what());
    }
  });

  py::class_<Transaction>(mod, "Transaction")
      .def(py::init([](TxId id, double size, double bid, std::optional<double> valuation, bool fake) {
             return Transaction{id, size, bid, valuation.value_or(bid), fake};
           }),
           py::arg("id"), py::arg("size") = 1.0, py::arg("bid") = 0.0,
           py::arg("valuation") = py::none(), py::arg("fake") = false)
      .def_readwrite("id", &Transaction::id)
      .def_readwrite("size", &Transaction::size)
      .def_readwrite("bid", &Transaction::bid)
      .def_readwrite("valuation", &Transaction::valuation)
      .def_readwrite("fake", &Transaction::fake)
      .def("__repr__", [](Transaction const &t) {
        return "Transaction(id=" + std::to_string(t.id) + ", size=" + format_double(t.size) +
               ", bid=" + format_double(t.bid) + ")";
      });

  py::class_<Mempool>(mod, "Mempool")
      .def(py::init([](std::vector<Transaction> txs) { return Mempool(std::move(txs)); }))
      .def("__len__", &Mempool::size)
      .def("__getitem__", [](Mempool const &m, std::size_t i) {
        if (i >= m.size())
        {
          throw py::index_error();
        }
        return m[i];
      })
      .def_property_readonly("transactions",
                             [](Mempool const &m) {
                               return std::vector<Transaction>(m.begin(), m.end());
                             })
      .def("total_size", &Mempool::total_size)
      .def("with_bid", &Mempool::with_bid);

  mod.def(
      "sample_mempool",
      [](std::size_t n, std::string const &bids, std::string const &sizes, std::uint64_t seed) {
        return sample_mempool(n, BidDistribution::parse(bids), BidDistribution::parse(sizes), seed);
      },
      py::arg("n"), py::arg("bids"), py::arg("sizes") = "constant(1)", py::arg("seed") = 0);

  py::class_<MechanismSpec>(mod, "MechanismSpec")
      .def_static("fpa", &MechanismSpec::fpa)
      .def_static("spa", &MechanismSpec::spa)
      .def_static("eip1559", &MechanismSpec::eip1559, py::arg("base_fee"))
      .def_static("bitcoinf", &MechanismSpec::bitcoinf, py::arg("alpha"), py::arg("delta"))
      .def_static("bitcoinzf", &MechanismSpec::bitcoinzf, py::arg("alpha"))
      .def_static("stfm", &MechanismSpec::stfm, py::arg("gamma"))
      .def_static("rtfm", &MechanismSpec::rtfm, py::arg("phi"))
      .def_static("uniform", &MechanismSpec::uniform)
      .def_static("from_config", &MechanismSpec::from_config)
      .def("to_config", &MechanismSpec::to_config)
      .def_property_readonly("allocation", &MechanismSpec::allocation_name)
      .def_property_readonly("randomized",
                             [](MechanismSpec const &s) { return s.type() == MechType::Randomized; })
      .def("__eq__", [](MechanismSpec const &a, MechanismSpec const &b) { return a == b; });

  mod.def(
      "run_mechanism",
      [](MechanismSpec const &spec, Mempool const &m, double capacity,
         std::vector<Transaction> const &fakes, std::uint64_t seed) {
        return outcome_dict(run_mechanism(spec, m, capacity, fakes, seed));
      },
      py::arg("spec"), py::arg("mempool"), py::arg("capacity"),
      py::arg("fakes") = std::vector<Transaction>{}, py::arg("seed") = 0);

  mod.def(
      "optimal_allocate",
      [](Mempool const &m, double capacity, bool greedy) {
        SolverOptions opts;
        opts.solver = greedy ? Solver::Greedy : Solver::Exact;
        return optimal_allocate(m, capacity, opts).selected;
      },
      py::arg("mempool"), py::arg("capacity"), py::arg("greedy") = false);
  mod.def(
      "stfm_allocate",
      [](Mempool const &m, double capacity, double gamma, std::uint64_t seed) {
        return stfm_allocate(m, capacity, gamma, seed).selected;
      },
      py::arg("mempool"), py::arg("capacity"), py::arg("gamma"), py::arg("seed") = 0);
  mod.def("stfm_first_draw_distribution", &stfm_first_draw_distribution, py::arg("mempool"),
          py::arg("gamma"));

  mod.def(
      "sha256_hex", [](py::bytes data) {
        std::string s = data;
        return to_hex(hash_bytes(std::string_view(s)));
      },
      py::arg("data"));
  mod.def(
      "merkle_root_hex",
      [](std::vector<py::bytes> const &leaves) {
        std::vector<Bytes> bytes;
        for (auto const &l : leaves)
        {
          std::string s = l;
          bytes.emplace_back(s.begin(), s.end());
        }
        return to_hex(merkle_root(bytes));
      },
      py::arg("leaves"));
  mod.def(
      "mine_block",
      [](std::string const &parent, std::string const &root_rand, std::string const &root_opt,
         std::uint64_t height, unsigned target_bits, std::uint64_t phi_num, std::uint64_t phi_den,
         std::uint64_t seed) {
        auto     d = Difficulty::with_target_bits(target_bits, phi_num, phi_den);
        auto     b = mine_block(hash_arg(parent), hash_arg(root_rand), hash_arg(root_opt), height, d, seed);
        py::dict out;
        out["block_hash"]     = to_hex(b.block_hash);
        out["nonce"]          = b.header.nonce;
        out["toss"]           = b.toss;
        out["confirmed_root"] = to_hex(b.confirmed_root);
        out["trials"]         = b.trials;
        out["valid"]          = verify_block(b, d);
        return out;
      },
      py::arg("parent") = "", py::arg("root_rand") = "", py::arg("root_opt") = "",
      py::arg("height") = 0, py::arg("target_bits") = 240, py::arg("phi_num") = 1,
      py::arg("phi_den") = 2, py::arg("seed") = 0);

  mod.def(
      "estimate_zti",
      [](MechanismSpec const &spec, Mempool const &m, double capacity, std::size_t trials,
         std::uint64_t seed) { return report_dict(estimate_zti(spec, m, capacity, trials, seed)); },
      py::arg("spec"), py::arg("mempool"), py::arg("capacity"), py::arg("trials") = 1000,
      py::arg("seed") = 0);
  mod.def(
      "estimate_monotonicity",
      [](MechanismSpec const &spec, Mempool const &m, double capacity, TxId target,
         std::vector<double> const &epsilons, std::size_t trials, std::uint64_t seed) {
        return report_dict(estimate_monotonicity(spec, m, capacity, target, epsilons, trials, seed));
      },
      py::arg("spec"), py::arg("mempool"), py::arg("capacity"), py::arg("target"),
      py::arg("epsilons") = std::vector<double>{0.5, 1.0}, py::arg("trials") = 1000,
      py::arg("seed") = 0);
  mod.def(
      "check_uic",
      [](MechanismSpec const &spec, Mempool const &m, double capacity, TxId user,
         std::vector<double> const &grid, std::size_t trials, std::uint64_t seed) {
        return report_dict(check_uic(spec, m, capacity, user, grid, trials, seed));
      },
      py::arg("spec"), py::arg("mempool"), py::arg("capacity"), py::arg("user"), py::arg("bid_grid"),
      py::arg("trials") = 1000, py::arg("seed") = 0);
  mod.def(
      "search_mic_deviation",
      [](MechanismSpec const &spec, Mempool const &m, double capacity, std::size_t budget,
         std::vector<double> const &grid, std::uint64_t seed, std::size_t trials) {
        MicOptions opts;
        opts.trials = trials;
        return report_dict(search_mic_deviation(spec, m, capacity, budget, grid, seed, opts));
      },
      py::arg("spec"), py::arg("mempool"), py::arg("capacity"), py::arg("fake_budget"),
      py::arg("fake_bid_grid"), py::arg("seed") = 0, py::arg("trials") = 2000);
  mod.def(
      "empirical_cof",
      [](MechanismSpec const &spec, Mempool const &m, double capacity, std::size_t trials,
         std::uint64_t seed) {
        auto     r = empirical_cof(spec, m, capacity, trials, seed);
        py::dict d;
        d["opt_utility"]       = r.opt_utility;
        d["mech_utility_mean"] = r.mech_utility_mean;
        d["cof"]               = r.cof;
        d["closed_form"]       = r.closed_form ? py::cast(*r.closed_form) : py::none();
        d["cov"]               = r.cov ? py::cast(*r.cov) : py::none();
        return d;
      },
      py::arg("spec"), py::arg("mempool"), py::arg("capacity"), py::arg("trials") = 1000,
      py::arg("seed") = 0);
  mod.def("stfm_cof_bound", &stfm_cof_bound, py::arg("n"), py::arg("c"), py::arg("b"),
          py::arg("gamma"));
  mod.def("rtfm_cof", &rtfm_cof, py::arg("phi"));
  mod.def("rtfm_cov", &rtfm_cov, py::arg("phi"));
  mod.def("rtfm_cov_ratio", &rtfm_cov_ratio, py::arg("phi"));
  mod.def("tune_gamma", &tune_gamma, py::arg("mempool"), py::arg("capacity"),
          py::arg("alpha_target"), py::arg("phi_ratio"), py::arg("gamma_lo"), py::arg("gamma_hi"),
          py::arg("trials") = 500, py::arg("seed") = 0);
  mod.def(
      "update_base_fee",
      [](double lambda, double block_size, double target, double step) {
        return update_base_fee(BaseFeeState{lambda, step}, block_size, target).lambda;
      },
      py::arg("base_fee"), py::arg("block_size"), py::arg("target"), py::arg("step") = 0.125);

  mod.def(
      "run_sweep",
      [](std::string const &config_text) {
        auto cfg = ExperimentConfig::parse(config_text);
        return rows_list(std::holds_alternative<SoftmaxRule>(cfg.mechanism.allocation)
                             ? run_stfm_sweep(cfg)
                             : run_rtfm_sweep(cfg));
      },
      py::arg("config_text"));
}
