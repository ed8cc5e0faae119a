#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tcusim/bench.hpp"
#include "tcusim/dataset.hpp"
#include "tcusim/distances.hpp"
#include "tcusim/jl.hpp"
#include "tcusim/lsh.hpp"
#include "tcusim/tcu.hpp"

namespace py = pybind11;
using namespace tcusim;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint64_t> pairs_array(const std::vector<IdPair>& pairs) {
  py::array_t<std::uint64_t> out({pairs.size(), std::size_t{2}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    view(i, 0) = pairs[i].p;
    view(i, 1) = pairs[i].q;
  }
  return out;
}

py::dict counts_dict(const CandidateCounts& c) {
  py::dict out;
  out["near"] = c.near;
  out["approx"] = c.approx;
  out["far"] = c.far;
  return out;
}

std::string csv(const Report& report) {
  std::ostringstream out;
  report.write_csv(out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Tensor-core cost simulator: tiled products, blocked JL transforms and similarity joins.";

  py::class_<TcuConfig>(mod, "TcuConfig")
      .def(py::init([](std::uint64_t m, const std::string& tau) { return bench::make_config(m, tau); }), py::arg("m"),
           py::arg("tau") = "m", "tau is \"m\", \"m^1.5\" or a rational such as \"5/2\".")
      .def_property_readonly("m", &TcuConfig::m)
      .def_property_readonly("tile_side", &TcuConfig::tile_side)
      .def_property_readonly("tau", [](const TcuConfig& c) { return c.tau().str(); })
      .def("__repr__", [](const TcuConfig& c) { return "TcuConfig(m=" + std::to_string(c.m()) + ", tau=" + c.tau().str() + ")"; });

  py::class_<CostLedger>(mod, "CostLedger")
      .def(py::init<>())
      .def_readonly("tile_mults", &CostLedger::tile_mults)
      .def_readonly("ram_flops", &CostLedger::ram_flops)
      .def_property_readonly("tcu_time", [](const CostLedger& l) { return l.tcu_time.str(); })
      .def_property_readonly("tcu_time_float", [](const CostLedger& l) { return l.tcu_time.to_double(); })
      .def("__repr__", [](const CostLedger& l) {
        return "CostLedger(tile_mults=" + std::to_string(l.tile_mults) + ", tcu_time=" + l.tcu_time.str() +
               ", ram_flops=" + std::to_string(l.ram_flops) + ")";
      });

  mod.def("tile_count", &tile_count, py::arg("p"), py::arg("r"), py::arg("q"), py::arg("config"));
  mod.def(
      "multiply",
      [](const Array& a, const Array& b, const TcuConfig& cfg, unsigned threads) {
        CostLedger ledger;
        Matrix out;
        const Matrix ma = to_matrix(a), mb = to_matrix(b);
        {
          py::gil_scoped_release release;
          out = multiply(ma, mb, cfg, ledger, threads);
        }
        return py::make_tuple(to_array(out), ledger);
      },
      py::arg("a"), py::arg("b"), py::arg("config"), py::arg("threads") = 1,
      "Tiled product on the simulated unit; returns (product, ledger).");

  mod.def("target_dim", &target_dim, py::arg("eps"), py::arg("delta"), py::arg("c_const") = 4.0);
  mod.def(
      "build_schedule",
      [](std::size_t d, std::size_t k, std::size_t zeta) {
        const JlSchedule s = build_schedule(d, k, zeta);
        py::list levels;
        for (const auto& l : s.levels) levels.append(py::make_tuple(l.rows, l.cols, l.blocks));
        py::dict out;
        out["d"] = s.d;
        out["k"] = s.k;
        out["zeta"] = s.zeta;
        out["ell"] = s.ell;
        out["d_padded"] = s.d_padded;
        out["levels"] = levels;
        return out;
      },
      py::arg("d"), py::arg("k"), py::arg("zeta") = 2, "Level shapes as (rows, cols, blocks) tuples.");

  py::class_<JlTransform>(mod, "JlTransform")
      .def_property_readonly("input_dim", &JlTransform::input_dim)
      .def_property_readonly("output_dim", &JlTransform::output_dim)
      .def_property_readonly("seed", &JlTransform::seed)
      .def_property_readonly("padded_dim", [](const JlTransform& t) { return t.schedule().d_padded; })
      .def("dense", [](const JlTransform& t) { return to_array(materialize_dense(t)); });

  mod.def(
      "sample_transform",
      [](std::size_t d, double eps, double delta, std::size_t zeta, double c_const, const std::string& distribution,
         std::uint64_t seed, const std::optional<TcuConfig>& cfg) {
        JlParams params;
        params.eps = eps;
        params.delta = delta;
        params.zeta = zeta;
        params.c_const = c_const;
        params.distribution = EntryDistribution::parse(distribution);
        return cfg ? sample_transform(params, d, seed, *cfg) : sample_transform(params, d, seed);
      },
      py::arg("d"), py::arg("eps") = 0.25, py::arg("delta") = 0.05, py::arg("zeta") = 2, py::arg("c_const") = 4.0,
      py::arg("distribution") = "gaussian", py::arg("seed") = 1, py::arg("config") = std::nullopt);

  mod.def(
      "jl_apply",
      [](const JlTransform& t, const Array& x, const TcuConfig& cfg, unsigned threads) {
        CostLedger ledger;
        if (x.ndim() == 1) {
          const std::vector<double> v(x.data(), x.data() + x.shape(0));
          return py::make_tuple(to_array(apply(t, v, cfg, ledger)), ledger);
        }
        const Matrix m = to_matrix(x);
        Matrix out;
        {
          py::gil_scoped_release release;
          out = apply_batch(t, m, cfg, ledger, threads);
        }
        return py::make_tuple(to_array(out), ledger);
      },
      py::arg("transform"), py::arg("x"), py::arg("config"), py::arg("threads") = 1,
      "Applies the transform to one vector or to the rows of a matrix; returns (result, ledger).");

  mod.def(
      "exact_distance",
      [](const Array& x, const Array& y, const std::string& dist) {
        if (x.ndim() != 1 || y.ndim() != 1) throw std::invalid_argument("expected 1-d arrays");
        const std::vector<double> a(x.data(), x.data() + x.shape(0)), b(y.data(), y.data() + y.shape(0));
        return exact_distance(a, b, IpDistance::parse(dist, a.size()));
      },
      py::arg("x"), py::arg("y"), py::arg("dist"));

  mod.def(
      "brute_force_join",
      [](const Array& p, const Array& q, const std::string& dist, double r, const TcuConfig& cfg,
         bool drop_self_pairs, unsigned threads) {
        const PointSet ps(to_matrix(p)), qs(to_matrix(q));
        JoinOptions options;
        options.drop_self_pairs = drop_self_pairs;
        options.threads = threads;
        CostLedger ledger;
        JoinResult res;
        {
          py::gil_scoped_release release;
          res = brute_force_join(ps, qs, IpDistance::parse(dist, ps.dim()), r, cfg, ledger, options);
        }
        return py::make_tuple(pairs_array(res.pairs), ledger);
      },
      py::arg("p"), py::arg("q"), py::arg("dist"), py::arg("r"), py::arg("config"), py::arg("drop_self_pairs") = false,
      py::arg("threads") = 1, "Exact join; returns (pairs as an n x 2 id array, ledger).");

  mod.def(
      "lsh_join",
      [](const Array& p, const Array& q, const std::string& dist, double r, double c, const TcuConfig& cfg,
         const std::string& family, std::uint64_t seed, bool drop_self_pairs, unsigned threads) {
        const PointSet ps(to_matrix(p)), qs(to_matrix(q));
        const IpDistance ipd = IpDistance::parse(dist, ps.dim());
        std::unique_ptr<LshFamily> fam;
        if (family == "bitsample") fam = bit_sampling_family(ps.dim());
        else if (family == "simhash") fam = simhash_family(ps.dim());
        else throw std::invalid_argument("unknown family: " + family);
        const RepetitionPlan plan = plan_repetitions(fam->sensitivity(r, c), ps.size(), cfg);
        JoinOptions options;
        options.drop_self_pairs = drop_self_pairs;
        options.threads = threads;
        CostLedger ledger;
        JoinResult res;
        {
          py::gil_scoped_release release;
          res = lsh_join(ps, qs, ipd, r, *fam, plan, cfg, seed, ledger, options);
        }
        py::dict out;
        out["pairs"] = pairs_array(res.pairs);
        out["ledger"] = ledger;
        out["candidates"] = counts_dict(res.stats.candidates);
        out["k_low"] = plan.k_low;
        out["k_high"] = plan.k_high;
        out["L_low"] = plan.L_low;
        out["L_high"] = plan.L_high;
        out["p1"] = plan.params.p1;
        out["p2"] = plan.params.p2;
        out["rho"] = plan.params.rho;
        return out;
      },
      py::arg("p"), py::arg("q"), py::arg("dist"), py::arg("r"), py::arg("c"), py::arg("config"),
      py::arg("family") = "bitsample", py::arg("seed") = 1, py::arg("drop_self_pairs") = false, py::arg("threads") = 1,
      "Bucketed join with a planned number of tables; returns a dict with pairs, ledger, candidate counts and the plan.");

  mod.def(
      "generate_planted",
      [](std::size_t n, std::size_t d, const std::string& dist, std::size_t planted, double planted_distance,
         double background, std::uint64_t seed) {
        PlantedSpec spec;
        spec.n = n;
        spec.d = d;
        spec.kind = IpDistance::parse(dist, d).kind;
        spec.planted = planted;
        spec.planted_distance = planted_distance;
        spec.background = background;
        spec.seed = seed;
        const PlantedInstance inst = generate_planted(spec);
        return py::make_tuple(to_array(inst.p.data()), to_array(inst.q.data()), pairs_array(inst.truth));
      },
      py::arg("n"), py::arg("d"), py::arg("dist") = "hamming", py::arg("planted") = 4, py::arg("planted_distance") = 1.0,
      py::arg("background") = 8.0, py::arg("seed") = 1, "Returns (P, Q, truth pairs).");

  mod.def(
      "bench_join",
      [](std::uint64_t m, const std::string& tau, std::size_t n, std::size_t d, double r, double c,
         const std::string& mode, std::size_t amplify, std::uint64_t seed, unsigned threads) {
        bench::JoinCommand cmd;
        cmd.common.m = m;
        cmd.common.tau = tau;
        cmd.common.seed = seed;
        cmd.common.threads = threads;
        cmd.n = n;
        cmd.d = d;
        cmd.r = r;
        cmd.approx_c = c;
        cmd.mode = mode;
        cmd.amplify = amplify;
        cmd.planted = std::min(cmd.planted, n);
        py::gil_scoped_release release;
        return csv(bench::cmd_join(cmd));
      },
      py::arg("m") = 256, py::arg("tau") = "m", py::arg("n") = 1024, py::arg("d") = 128, py::arg("r") = 4.0,
      py::arg("c") = 12.0, py::arg("mode") = "both", py::arg("amplify") = 1, py::arg("seed") = 1, py::arg("threads") = 1,
      "Runs the join benchmark on a planted Hamming instance and returns the CSV report.");

  mod.def(
      "bench_jl",
      [](std::uint64_t m, const std::string& tau, std::size_t n, std::size_t d, double eps, double delta,
         std::size_t trials, std::uint64_t seed, unsigned threads) {
        bench::JlCommand cmd;
        cmd.common.m = m;
        cmd.common.tau = tau;
        cmd.common.seed = seed;
        cmd.common.threads = threads;
        cmd.n = n;
        cmd.d = d;
        cmd.eps = eps;
        cmd.delta = delta;
        cmd.trials = trials;
        py::gil_scoped_release release;
        return csv(bench::cmd_jl(cmd));
      },
      py::arg("m") = 256, py::arg("tau") = "m", py::arg("n") = 16, py::arg("d") = 4096, py::arg("eps") = 0.25,
      py::arg("delta") = 0.05, py::arg("trials") = 0, py::arg("seed") = 1, py::arg("threads") = 1,
      "Runs the JL benchmark on Gaussian vectors and returns the CSV report.");
}
