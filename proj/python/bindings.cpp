// Copyright 2026 The SignFed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>

#include "signfed/config.hpp"
#include "signfed/experiment.hpp"
#include "signfed/fedsim.hpp"
#include "signfed/verify.hpp"

namespace py = pybind11;
using namespace signfed;

namespace {

// Python side uses math.inf / positive ints for z.
ZIndex z_from_python(double z) {
  if (std::isinf(z)) return ZIndex::infinity();
  const int zi = static_cast<int>(z);
  if (static_cast<double>(zi) != z) {
    throw py::value_error("z must be a positive integer or math.inf");
  }
  return ZIndex::finite(zi);
}

double z_to_python(ZIndex z) {
  return z.is_infinite() ? std::numeric_limits<double>::infinity()
                         : static_cast<double>(z.finite_value());
}

}  // namespace

PYBIND11_MODULE(_signfed, m) {
  m.doc() = "Stochastic sign-compressed federated optimization lab";

  py::enum_<StreamPurpose>(m, "StreamPurpose")
      .value("PROBLEM_DATA", StreamPurpose::kProblemData)
      .value("GRAD_NOISE", StreamPurpose::kGradNoise)
      .value("COMPRESS_NOISE", StreamPurpose::kCompressNoise)
      .value("QUANTIZER", StreamPurpose::kQuantizer)
      .value("CLIENT_SAMPLING", StreamPurpose::kClientSampling);

  py::class_<Philox>(m, "Philox")
      .def(py::init<uint64_t, uint64_t, uint64_t, StreamPurpose>(),
           py::arg("seed"), py::arg("round") = 0, py::arg("client") = 0,
           py::arg("purpose") = StreamPurpose::kCompressNoise)
      .def("next_u64", &Philox::next_u64)
      .def("uniform01", &Philox::uniform01)
      .def("normal", &Philox::normal)
      .def("gamma", &Philox::gamma, py::arg("shape"));

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init([](double z, double sigma) {
             return NoiseSpec{z_from_python(z), sigma};
           }),
           py::arg("z"), py::arg("sigma"))
      .def_property_readonly(
          "z", [](const NoiseSpec& spec) { return z_to_python(spec.z); })
      .def_readonly("sigma", &NoiseSpec::sigma);

  m.def("eta", [](double z) { return eta(z_from_python(z)); }, py::arg("z"));
  m.def("pdf", [](double z, double t) { return pdf(z_from_python(z), t); },
        py::arg("z"), py::arg("t"));
  m.def("psi", [](double z, double x) { return psi(z_from_python(z), x); },
        py::arg("z"), py::arg("x"));
  m.def("cdf", [](double z, double t) { return cdf(z_from_python(z), t); },
        py::arg("z"), py::arg("t"));
  m.def("expected_sign",
        [](double z, double sigma, double x) {
          return expected_sign({z_from_python(z), sigma}, x);
        },
        py::arg("z"), py::arg("sigma"), py::arg("x"));
  m.def("bias_bound",
        [](double z, const std::vector<double>& x, double sigma) {
          return bias_bound(z_from_python(z), x, sigma);
        },
        py::arg("z"), py::arg("x"), py::arg("sigma"));
  m.def("sample",
        [](double z, double sigma, Philox& rng) {
          return sample({z_from_python(z), sigma}, rng);
        },
        py::arg("z"), py::arg("sigma"), py::arg("rng"));
  m.def("cdf_sup_gap",
        [](int z) { return cdf_sup_gap(ZIndex::finite(z)); }, py::arg("z"));

  py::enum_<CompressorType>(m, "CompressorType")
      .value("EXACT_SIGN", CompressorType::kExactSign)
      .value("STOCHASTIC_SIGN", CompressorType::kStochasticSign)
      .value("INPUT_SCALED_SIGN", CompressorType::kInputScaledSign)
      .value("UNBIASED_QUANTIZER", CompressorType::kUnbiasedQuantizer)
      .value("ERROR_FEEDBACK_SIGN", CompressorType::kErrorFeedbackSign)
      .value("IDENTITY", CompressorType::kIdentity);

  py::class_<CompressorKind>(m, "CompressorKind")
      .def_static("exact_sign", &CompressorKind::exact_sign)
      .def_static("stochastic_sign",
                  [](double z, double sigma) {
                    return CompressorKind::stochastic_sign(
                        {z_from_python(z), sigma});
                  },
                  py::arg("z"), py::arg("sigma"))
      .def_static("input_scaled_sign", &CompressorKind::input_scaled_sign)
      .def_static("unbiased_quantizer", &CompressorKind::unbiased_quantizer,
                  py::arg("levels"))
      .def_static("error_feedback_sign", &CompressorKind::error_feedback_sign)
      .def_static("identity", &CompressorKind::identity)
      .def_readonly("type", &CompressorKind::type)
      .def_readonly("levels", &CompressorKind::levels);

  py::class_<EfState>(m, "EfState")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_readonly("residual", &EfState::residual);

  py::class_<CompressedUpdate>(m, "CompressedUpdate")
      .def_readonly("type", &CompressedUpdate::type)
      .def_readonly("dim", &CompressedUpdate::dim)
      .def_readonly("scale", &CompressedUpdate::scale)
      .def("decode", &CompressedUpdate::decode)
      .def("serialize", [](const CompressedUpdate& update) {
        const auto bytes = update.serialize();
        return py::bytes(reinterpret_cast<const char*>(bytes.data()),
                         bytes.size());
      })
      .def_property_readonly("payload_bits", [](const CompressedUpdate& u) {
        return py::bytes(reinterpret_cast<const char*>(u.sign_bits.data()),
                         u.sign_bits.size());
      });

  m.def("compress",
        [](const CompressorKind& kind, const std::vector<double>& v,
           Philox& rng, EfState* ef) { return compress(kind, v, rng, ef); },
        py::arg("kind"), py::arg("v"), py::arg("rng"),
        py::arg("ef") = nullptr);
  m.def("quantize",
        [](int levels, const std::vector<double>& v, Philox& rng) {
          return quantize(levels, v, rng);
        },
        py::arg("levels"), py::arg("v"), py::arg("rng"));
  m.def("pack_bits", [](const std::vector<int8_t>& signs) {
    const auto bytes = pack_bits(signs);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("unpack_bits", [](const py::bytes& data, std::size_t dim) {
    const std::string raw = data;
    const std::span<const uint8_t> bytes(
        reinterpret_cast<const uint8_t*>(raw.data()), raw.size());
    return unpack_bits(bytes, dim);
  });
  m.def("uplink_bits", &uplink_bits, py::arg("kind"), py::arg("dim"));

  py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
      .def_property_readonly("dim", &Problem::dim)
      .def_property_readonly("num_clients", &Problem::num_clients)
      .def("objective",
           [](const Problem& p, const std::vector<double>& x) {
             return p.objective(x);
           })
      .def("gradient",
           [](const Problem& p, const std::vector<double>& x) {
             return p.gradient(x);
           })
      .def("client_objective",
           [](const Problem& p, int i, const std::vector<double>& x) {
             return p.client_objective(i, x);
           })
      .def("client_gradient",
           [](const Problem& p, int i, const std::vector<double>& x) {
             return p.client_gradient(i, x);
           })
      .def_property_readonly("optimum", &Problem::optimum)
      .def_property_readonly("optimal_value", &Problem::optimal_value);

  m.def("make_consensus",
        [](int dim, int n_clients, uint64_t seed) {
          return std::const_pointer_cast<Problem>(
              make_consensus(dim, n_clients, seed));
        },
        py::arg("dim"), py::arg("n_clients"), py::arg("seed"));
  m.def("make_counterexample",
        [](double a) {
          return std::const_pointer_cast<Problem>(make_counterexample(a));
        },
        py::arg("a"));
  m.def("make_synthetic_logreg",
        [](int dim, int n_clients, int samples_per_client, double alpha,
           uint64_t seed) {
          return std::const_pointer_cast<Problem>(make_synthetic_logreg(
              dim, n_clients, samples_per_client, alpha, seed));
        },
        py::arg("dim"), py::arg("n_clients"), py::arg("samples_per_client"),
        py::arg("dirichlet_alpha"), py::arg("seed"));

  py::class_<GradNoiseModel> grad_noise(m, "GradNoiseModel");
  py::enum_<GradNoiseModel::Kind>(grad_noise, "Kind")
      .value("NONE", GradNoiseModel::Kind::kNone)
      .value("GAUSSIAN", GradNoiseModel::Kind::kGaussian)
      .value("TRUNCATED_GAUSSIAN", GradNoiseModel::Kind::kTruncatedGaussian);
  grad_noise
      .def(py::init([](GradNoiseModel::Kind kind, double zeta, double q_inf) {
             return GradNoiseModel{kind, zeta, q_inf};
           }),
           py::arg("kind") = GradNoiseModel::Kind::kNone, py::arg("zeta") = 0.0,
           py::arg("q_inf") = 0.0)
      .def_readwrite("kind", &GradNoiseModel::kind)
      .def_readwrite("zeta", &GradNoiseModel::zeta)
      .def_readwrite("q_inf", &GradNoiseModel::q_inf);

  m.def("minibatch_gradient",
        [](const std::shared_ptr<Problem>& problem, const GradNoiseModel& noise,
           int client, const std::vector<double>& x, Philox& rng) {
          return minibatch_gradient(*problem, noise, client, x, rng);
        },
        py::arg("problem"), py::arg("noise"), py::arg("client"), py::arg("x"),
        py::arg("rng"));

  py::class_<ProblemSpec> problem_spec(m, "ProblemSpec");
  py::enum_<ProblemSpec::Kind>(problem_spec, "Kind")
      .value("CONSENSUS", ProblemSpec::Kind::kConsensus)
      .value("COUNTEREXAMPLE", ProblemSpec::Kind::kCounterexample)
      .value("SYNTHETIC_LOGREG", ProblemSpec::Kind::kSyntheticLogreg);
  problem_spec.def(py::init<>())
      .def_readwrite("kind", &ProblemSpec::kind)
      .def_readwrite("dim", &ProblemSpec::dim)
      .def_readwrite("clients", &ProblemSpec::clients)
      .def_readwrite("seed", &ProblemSpec::seed)
      .def_readwrite("a", &ProblemSpec::a)
      .def_readwrite("samples_per_client", &ProblemSpec::samples_per_client)
      .def_readwrite("dirichlet_alpha", &ProblemSpec::dirichlet_alpha)
      .def("instantiate", [](const ProblemSpec& spec) {
        return std::const_pointer_cast<Problem>(spec.instantiate());
      });

  py::class_<ServerLr>(m, "ServerLr")
      .def_static("auto_from_noise", &ServerLr::auto_from_noise)
      .def_static("explicit_value", &ServerLr::explicit_value, py::arg("eta"))
      .def_readonly("auto_rule", &ServerLr::auto_rule)
      .def_readonly("value", &ServerLr::value);

  py::enum_<SchedulerKind>(m, "SchedulerKind")
      .value("NONE", SchedulerKind::kNone)
      .value("PLATEAU", SchedulerKind::kPlateau);

  py::class_<PlateauConfig>(m, "PlateauConfig")
      .def(py::init([](double sigma_init, double sigma_bound, int patience,
                       double beta, double rel_tol) {
             return PlateauConfig{sigma_init, sigma_bound, patience, beta,
                                  rel_tol};
           }),
           py::arg("sigma_init") = 0.01, py::arg("sigma_bound") = 0.5,
           py::arg("patience") = 30, py::arg("beta") = 1.5,
           py::arg("rel_tol") = 0.0)
      .def_readwrite("sigma_init", &PlateauConfig::sigma_init)
      .def_readwrite("sigma_bound", &PlateauConfig::sigma_bound)
      .def_readwrite("patience", &PlateauConfig::patience)
      .def_readwrite("beta", &PlateauConfig::beta)
      .def_readwrite("rel_tol", &PlateauConfig::rel_improvement);

  py::class_<PlateauState>(m, "PlateauState")
      .def_static("init", &PlateauState::init, py::arg("config"))
      .def_readonly("sigma", &PlateauState::sigma)
      .def_readonly("best_objective", &PlateauState::best_objective)
      .def_readonly("stall_rounds", &PlateauState::stall_rounds);

  m.def("plateau_observe",
        [](PlateauState& state, const PlateauConfig& config, double objective) {
          observe(state, config, objective);
        },
        py::arg("state"), py::arg("config"), py::arg("objective"));
  m.def("plateau_preset", [](const std::string& name) { return plateau_preset(name); },
        py::arg("name"));

  py::class_<DpConfig>(m, "DpConfig")
      .def(py::init([](double clip, double noise_multiplier) {
             return DpConfig{clip, noise_multiplier};
           }),
           py::arg("clip"), py::arg("noise_multiplier"))
      .def_readwrite("clip", &DpConfig::clip)
      .def_readwrite("noise_multiplier", &DpConfig::noise_multiplier);

  m.def("clip_l2",
        [](const std::vector<double>& v, double c) { return clip_l2(v, c); },
        py::arg("v"), py::arg("clip"));
  m.def("dp_compress",
        [](const std::vector<double>& v, const DpConfig& config, Philox& rng) {
          return dp_compress(v, config, rng);
        },
        py::arg("v"), py::arg("config"), py::arg("rng"));
  m.def("dp_presets", [] {
    py::list presets;
    for (const auto& preset : dp_presets()) {
      py::dict entry;
      entry["name"] = preset.name;
      entry["epsilon"] = preset.epsilon;
      entry["noise_multiplier"] = preset.noise_multiplier;
      entry["server_lr"] = preset.server_lr;
      presets.append(entry);
    }
    return presets;
  });

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("problem", &RunConfig::problem)
      .def_readwrite("rounds", &RunConfig::rounds)
      .def_readwrite("local_steps", &RunConfig::local_steps)
      .def_readwrite("participation", &RunConfig::participation)
      .def_readwrite("client_lr", &RunConfig::client_lr)
      .def_readwrite("server_lr", &RunConfig::server_lr)
      .def_readwrite("compressor", &RunConfig::compressor)
      .def_readwrite("grad_noise", &RunConfig::grad_noise)
      .def_readwrite("scheduler", &RunConfig::scheduler)
      .def_readwrite("plateau", &RunConfig::plateau)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("dp", &RunConfig::dp)
      .def_readwrite("dump_updates", &RunConfig::dump_updates)
      .def_readwrite("x0", &RunConfig::x0);

  py::class_<RoundMetrics>(m, "RoundMetrics")
      .def_readonly("round", &RoundMetrics::round)
      .def_readonly("objective", &RoundMetrics::objective)
      .def_readonly("grad_norm_sq", &RoundMetrics::grad_norm_sq)
      .def_readonly("avg_local_grad_sq", &RoundMetrics::avg_local_grad_sq)
      .def_readonly("uplink_bits", &RoundMetrics::uplink_bits)
      .def_readonly("sigma", &RoundMetrics::sigma);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("rounds", &RunResult::rounds)
      .def_readonly("final_x", &RunResult::final_x);

  py::register_exception<DivergenceError>(m, "DivergenceError");

  m.def("run", &run, py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("local_update",
        [](const std::shared_ptr<Problem>& problem, const GradNoiseModel& noise,
           int client, const std::vector<double>& x, int local_steps,
           double client_lr, Philox& rng) {
          return local_update(*problem, noise, client, x, local_steps,
                              client_lr, rng);
        },
        py::arg("problem"), py::arg("noise"), py::arg("client"), py::arg("x"),
        py::arg("local_steps"), py::arg("client_lr"), py::arg("rng"));

  py::class_<TheoryConstants>(m, "TheoryConstants")
      .def(py::init<>())
      .def_readwrite("smoothness", &TheoryConstants::smoothness)
      .def_readwrite("l_max", &TheoryConstants::l_max)
      .def_readwrite("zeta_sq", &TheoryConstants::zeta_sq)
      .def_readwrite("grad_bound", &TheoryConstants::grad_bound)
      .def_readwrite("q_z", &TheoryConstants::q_z)
      .def_readwrite("q_inf", &TheoryConstants::q_inf)
      .def_readwrite("f_star", &TheoryConstants::f_star);

  m.def("theorem1_bound", &theorem1_bound, py::arg("constants"), py::arg("f0"),
        py::arg("rounds"), py::arg("local_steps"), py::arg("n_clients"),
        py::arg("gamma"), py::arg("sigma"), py::arg("z"), py::arg("d"));

  py::class_<CorollarySchedule>(m, "CorollarySchedule")
      .def_readonly("gamma", &CorollarySchedule::gamma)
      .def_readonly("sigma", &CorollarySchedule::sigma)
      .def_readonly("max_local_steps", &CorollarySchedule::max_local_steps);

  m.def("corollary_schedule",
        [](double z, int n_clients, double tau, double l_max) {
          return corollary_schedule(z_from_python(z), n_clients, tau, l_max);
        },
        py::arg("z"), py::arg("n_clients"), py::arg("tau"), py::arg("l_max"));
  m.def("sigma_threshold_inf", &sigma_threshold_inf, py::arg("local_steps"),
        py::arg("grad_bound"), py::arg("q_inf"));

  m.def("run_experiment_file",
        [](const std::filesystem::path& path, int threads) {
          const ExperimentFile experiment = ExperimentFile::load(path);
          const ExperimentResult result = execute_experiment(experiment, threads);
          py::dict out;
          out["summary"] = result.summary_path;
          out["any_diverged"] = result.any_diverged;
          py::list runs;
          for (const auto& outcome : result.runs) {
            py::dict entry;
            entry["group"] = outcome.group;
            entry["seed"] = outcome.seed;
            entry["csv"] = outcome.csv_path;
            entry["final_objective"] = outcome.final_objective;
            entry["diverged"] = outcome.diverged;
            runs.append(entry);
          }
          out["runs"] = runs;
          return out;
        },
        py::arg("path"), py::arg("threads") = 1);

  m.def("verify", [](bool fast) {
    py::list out;
    for (const auto& check : run_verification({fast})) {
      py::dict entry;
      entry["name"] = check.name;
      entry["passed"] = check.passed;
      entry["detail"] = check.detail;
      out.append(entry);
    }
    return out;
  }, py::arg("fast") = true);
}
