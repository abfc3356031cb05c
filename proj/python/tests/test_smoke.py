# Copyright 2026 The SignFed Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import os
import subprocess

import pytest

import signfed as sf


def test_noise_math_values():
    assert sf.eta(math.inf) == 1.0
    assert sf.eta(1) == pytest.approx(1.2533141373155003, abs=1e-14)
    assert sf.psi(1, 1.0) == pytest.approx(0.8556243918921488, abs=1e-13)
    assert sf.expected_sign(1, 1.0, 1.0) == pytest.approx(
        0.6826894921370859, abs=1e-13
    )
    assert sf.bias_bound(1, [1.0], 2.0) == pytest.approx(1 / 576, abs=1e-16)
    assert sf.pdf(math.inf, 0.5) == 0.5
    with pytest.raises(ValueError):
        sf.expected_sign(1, 0.0, 1.0)


def test_codec_round_trip():
    signs = [1, -1, 1, 1, -1, -1, -1, -1, 1]
    packed = sf.pack_bits(signs)
    assert packed[0] == 0x0D
    assert sf.unpack_bits(packed, 9) == signs


def test_sampler_support():
    rng = sf.Philox(seed=1)
    draws = [sf.sample(math.inf, 1.0, rng) for _ in range(1000)]
    assert all(-1.0 <= d <= 1.0 for d in draws)


def test_compress_and_bits():
    rng = sf.Philox(seed=2)
    update = sf.compress(sf.CompressorKind.exact_sign(), [0.0, -2.0, 3.0], rng)
    assert update.decode() == [1.0, -1.0, 1.0]
    assert sf.uplink_bits(sf.CompressorKind.identity(), 10) == 320
    assert sf.uplink_bits(sf.CompressorKind.unbiased_quantizer(1), 100) == 132


def test_dp_equivalence_bitwise():
    dp = sf.DpConfig(clip=0.01, noise_multiplier=2.77)
    v = [0.004 * ((i % 7) - 3) for i in range(40)]
    a = sf.dp_compress(v, dp, sf.Philox(seed=9))
    b = sf.compress(
        sf.CompressorKind.stochastic_sign(1, 2.77 * 0.01),
        sf.clip_l2(v, 0.01),
        sf.Philox(seed=9),
    )
    assert a.payload_bits == b.payload_bits


def test_run_is_deterministic_and_converges():
    cfg = sf.RunConfig()
    cfg.problem.kind = sf.ProblemSpec.Kind.CONSENSUS
    cfg.problem.dim = 6
    cfg.problem.clients = 8
    cfg.problem.seed = 3
    cfg.rounds = 400
    cfg.client_lr = 0.05
    cfg.compressor = sf.CompressorKind.stochastic_sign(1, 0.5)
    cfg.seed = 11
    cfg.x0 = [3.0]

    a = sf.run(cfg, 1)
    b = sf.run(cfg, 2)
    assert a.final_x == b.final_x
    assert [m.objective for m in a.rounds] == [m.objective for m in b.rounds]

    problem = cfg.problem.instantiate()
    f_star = problem.optimal_value
    assert a.rounds[-1].objective - f_star < 0.3 * (
        a.rounds[0].objective - f_star
    )
    assert a.rounds[-1].uplink_bits == 400 * 8 * 6


def test_counterexample_stuck():
    cfg = sf.RunConfig()
    cfg.problem.kind = sf.ProblemSpec.Kind.COUNTEREXAMPLE
    cfg.problem.a = 1.0
    cfg.rounds = 100
    cfg.client_lr = 0.01
    cfg.x0 = [0.5]
    cfg.compressor = sf.CompressorKind.stochastic_sign(math.inf, 0.9)
    assert sf.run(cfg).final_x == [0.5]


def test_theory_helpers():
    tc = sf.TheoryConstants()
    tc.smoothness = [0.0]
    assert sf.theorem1_bound(tc, 1.0, 1, 1, 1, 1.0, 1.0, 1, 1) == pytest.approx(2.0)
    sch = sf.corollary_schedule(1, 10, 1000.0, 0.0)
    assert sch.gamma == pytest.approx(0.021544346900318837, abs=1e-15)
    assert sch.sigma == pytest.approx(4.641588833612779, abs=1e-12)
    assert sf.corollary_schedule(math.inf, 4, 4.0, 0.0).sigma is None
    assert sf.sigma_threshold_inf(5, 1.0, 1.0) == 10.0


def test_experiment_file_round_trip(tmp_path):
    text = "\n".join(
        [
            "schema_version = 1",
            "name = pydemo",
            f"output_dir = {tmp_path / 'out'}",
            "repeat = 2",
            "problem.kind = counterexample",
            "problem.a = 1.0",
            "rounds = 20",
            "client_lr = 0.01",
            "server_lr = 1.0",
            "compressor = exact_sign",
            "x0 = 0.5",
            "",
        ]
    )
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    result = sf.run_experiment_file(path, threads=2)
    assert not result["any_diverged"]
    assert len(result["runs"]) == 2
    assert (tmp_path / "out" / "summary.json").exists()
    csv = (tmp_path / "out" / "pydemo_seed0.csv").read_text()
    assert csv.startswith(
        "round,objective,grad_norm_sq,avg_local_grad_sq,uplink_bits,sigma\n"
    )


@pytest.mark.skipif("SIGNFED_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_codes(tmp_path):
    cli = os.environ["SIGNFED_CLI"]
    bad = tmp_path / "bad.cfg"
    bad.write_text("schema_version = 1\nname = x\nbogus_key = 1\n")
    proc = subprocess.run([cli, "run", str(bad)], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "bogus_key" in proc.stderr

    diverging = tmp_path / "div.cfg"
    diverging.write_text(
        "\n".join(
            [
                "schema_version = 1",
                "name = div",
                f"output_dir = {tmp_path / 'divout'}",
                "problem.kind = consensus",
                "problem.dim = 3",
                "problem.clients = 2",
                "rounds = 40",
                "client_lr = 400",
                "server_lr = 1.0",
                "compressor = identity",
                "",
            ]
        )
    )
    proc = subprocess.run([cli, "run", str(diverging)], capture_output=True, text=True)
    assert proc.returncode == 3
