import numpy as np
import pytest

import svddf
from svddf import ImageGrid, read_pgm, synth_image, write_pgm
from svddf.cli import main


@pytest.fixture
def disk_pgm(tmp_path):
    base = synth_image("disk", 24, 24)
    remapped = ImageGrid(0.25 + 0.5 * base.pixels)
    path = tmp_path / "disk.pgm"
    write_pgm(remapped, path)
    return path


@pytest.fixture
def noisy_pgm(tmp_path, disk_pgm):
    rc = main(["add-noise", str(disk_pgm), "--delta", "0.4", "--seed", "9", "--out", str(tmp_path)])
    assert rc == 0
    return tmp_path / "disk_noisy.pgm"


class TestAddNoise:
    def test_zero_delta_identity_up_to_quantization(self, tmp_path, disk_pgm):
        out = tmp_path / "zero"
        rc = main(["add-noise", str(disk_pgm), "--delta", "0", "--seed", "1", "--out", str(out)])
        assert rc == 0
        a = read_pgm(disk_pgm)
        b = read_pgm(out / "disk_noisy.pgm")
        assert np.max(np.abs(a.pixels - b.pixels)) <= 0.5 / 255 + 1e-12

    def test_same_seed_same_bytes(self, tmp_path, disk_pgm):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(
                ["add-noise", str(disk_pgm), "--delta", "0.3", "--seed", "7", "--out", str(out)]
            )
            assert rc == 0
            outs.append((out / "disk_noisy.pgm").read_bytes())
        assert outs[0] == outs[1]

    def test_sidecar_records_parameters(self, tmp_path, disk_pgm):
        rc = main(["add-noise", str(disk_pgm), "--delta", "0.25", "--seed", "12", "--out", str(tmp_path)])
        assert rc == 0
        sidecar = (tmp_path / "disk_noisy.txt").read_text()
        assert "delta=0.25" in sidecar
        assert "seed=12" in sidecar

    def test_noise_level_on_disk_fixture(self, tmp_path):
        # delta = 0.54 multiplicative uniform noise lands near delta/sqrt(3);
        # the disk is shifted into [0.25, 0.75] so the writer's clipping to
        # [0, 1] barely bites (the plain indicator would lose a third of it)
        clean = ImageGrid(0.25 + 0.5 * synth_image("disk", 128, 128).pixels)
        path = tmp_path / "d.pgm"
        write_pgm(clean, path)
        rc = main(["add-noise", str(path), "--delta", "0.54", "--seed", "7", "--out", str(tmp_path)])
        assert rc == 0
        noisy = read_pgm(tmp_path / "d_noisy.pgm")
        err = svddf.rel_l2(svddf.vec(noisy), svddf.vec(clean))
        assert 0.25 <= err <= 0.35

    def test_missing_input(self, tmp_path):
        rc = main(["add-noise", str(tmp_path / "nope.pgm"), "--delta", "0.1"])
        assert rc == 2


class TestDenoise:
    def test_writes_outputs_and_reports_stop(self, tmp_path, disk_pgm, noisy_pgm, capsys):
        out = tmp_path / "run"
        rc = main(
            [
                "denoise",
                str(noisy_pgm),
                "--clean",
                str(disk_pgm),
                "--eta",
                "2",
                "--p",
                "1",
                "--stop",
                "rde",
                "--tol",
                "1e-3",
                "--max-steps",
                "300",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert (out / "disk_noisy_denoised.pgm").exists()
        csv = (out / "disk_noisy_trajectory.csv").read_text().splitlines()
        assert csv[0].startswith("step,t,dt,")
        printed = capsys.readouterr().out
        assert "stopped by" in printed
        metrics = (out / "disk_noisy_metrics.csv").read_text().splitlines()
        assert metrics[0] == "image_id,p,eta,steps,ssim_noisy,ssim_denoised,rel_err"

    def test_first_order_dispatch(self, tmp_path, noisy_pgm):
        out = tmp_path / "fo"
        rc = main(
            [
                "denoise",
                str(noisy_pgm),
                "--method",
                "first-order",
                "--stop",
                "none",
                "--max-steps",
                "10",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert (out / "disk_noisy_denoised.pgm").exists()

    def test_missing_input_exits_2_without_outputs(self, tmp_path):
        out = tmp_path / "never"
        rc = main(["denoise", str(tmp_path / "ghost.pgm"), "--out", str(out)])
        assert rc == 2
        assert not out.exists()

    def test_divergence_exits_1_and_keeps_partial_csv(self, tmp_path, noisy_pgm):
        # p = 2 keeps the stencil linear, so the oversized spectral step at
        # eta = 300 grows without the nonlinear saturation p < 2 would give
        out = tmp_path / "boom"
        rc = main(
            [
                "denoise",
                str(noisy_pgm),
                "--p",
                "2",
                "--eta",
                "300",
                "--dt",
                "auto",
                "--stop",
                "none",
                "--max-steps",
                "3000",
                "--out",
                str(out),
            ]
        )
        assert rc == 1
        assert (out / "disk_noisy_trajectory.csv").exists()
        assert not (out / "disk_noisy_denoised.pgm").exists()

    def test_deterministic_byte_identical_outputs(self, tmp_path, disk_pgm, noisy_pgm):
        payloads = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            rc = main(
                [
                    "denoise",
                    str(noisy_pgm),
                    "--clean",
                    str(disk_pgm),
                    "--eta",
                    "2",
                    "--max-steps",
                    "40",
                    "--stop",
                    "none",
                    "--out",
                    str(out),
                ]
            )
            assert rc == 0
            payloads.append(
                (
                    (out / "disk_noisy_denoised.pgm").read_bytes(),
                    (out / "disk_noisy_trajectory.csv").read_bytes(),
                    (out / "disk_noisy_metrics.csv").read_bytes(),
                )
            )
        assert payloads[0] == payloads[1]

    def test_config_file_and_flag_precedence(self, tmp_path, noisy_pgm):
        conf = tmp_path / "run.conf"
        conf.write_text("dt=0.125\nmax-steps=5\nstop=none\neta=2.0\n")
        out1 = tmp_path / "c1"
        assert main(["denoise", str(noisy_pgm), "--config", str(conf), "--out", str(out1)]) == 0
        line = (out1 / "disk_noisy_trajectory.csv").read_text().splitlines()[1]
        assert float(line.split(",")[2]) == 0.125
        out2 = tmp_path / "c2"
        assert (
            main(
                [
                    "denoise",
                    str(noisy_pgm),
                    "--config",
                    str(conf),
                    "--dt",
                    "0.0625",
                    "--out",
                    str(out2),
                ]
            )
            == 0
        )
        line = (out2 / "disk_noisy_trajectory.csv").read_text().splitlines()[1]
        assert float(line.split(",")[2]) == 0.0625


class TestSweep:
    def test_single_cell_matches_denoise(self, tmp_path, disk_pgm, noisy_pgm):
        out = tmp_path / "sweep1"
        args = [
            str(noisy_pgm),
            "--clean",
            str(disk_pgm),
            "--dt",
            "0.15",
            "--stop",
            "none",
            "--max-steps",
            "30",
            "--out",
            str(out),
        ]
        rc = main(["sweep", args[0], "--etas", "2", "--ps", "1"] + args[1:])
        assert rc == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert rows[0] == "p\\eta,2"
        cell = float(rows[1].split(",")[1])

        rc = main(["denoise"] + args)
        assert rc == 0
        metrics = (out / "disk_noisy_metrics.csv").read_text().splitlines()[1]
        assert cell == pytest.approx(float(metrics.split(",")[5]), rel=1e-12)

    def test_duplicates_deduplicated_with_warning(self, tmp_path, disk_pgm, noisy_pgm, capsys):
        out = tmp_path / "sweepdup"
        rc = main(
            [
                "sweep",
                str(noisy_pgm),
                "--clean",
                str(disk_pgm),
                "--etas",
                "2,2",
                "--ps",
                "1",
                "--dt",
                "0.15",
                "--stop",
                "none",
                "--max-steps",
                "5",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert "duplicate" in capsys.readouterr().err
        assert (out / "sweep.csv").read_text().splitlines()[0] == "p\\eta,2"

    def test_failed_cell_recorded_as_nan(self, tmp_path, disk_pgm, noisy_pgm):
        import math

        out = tmp_path / "sweepnan"
        rc = main(
            [
                "sweep",
                str(noisy_pgm),
                "--clean",
                str(disk_pgm),
                "--etas",
                "300,2",
                "--ps",
                "2",
                "--dt",
                "auto",
                "--stop",
                "none",
                "--max-steps",
                "2000",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        row = (out / "sweep.csv").read_text().splitlines()[1].split(",")
        assert row[1] == "nan"
        assert not math.isnan(float(row[2]))


class TestMetrics:
    def test_metrics_verb(self, tmp_path, disk_pgm, noisy_pgm, capsys):
        rc = main(
            [
                "metrics",
                "--clean",
                str(disk_pgm),
                "--noisy",
                str(noisy_pgm),
                "--denoised",
                str(disk_pgm),
                "--out",
                str(tmp_path / "m"),
            ]
        )
        assert rc == 0
        printed = capsys.readouterr().out.splitlines()
        assert printed[0] == "image_id,p,eta,steps,ssim_noisy,ssim_denoised,rel_err"
        fields = printed[1].split(",")
        assert float(fields[5]) == pytest.approx(1.0, abs=1e-12)
        assert (tmp_path / "m" / "metrics.csv").exists()

    def test_usage_error_exit_code(self):
        assert main(["metrics", "--clean", "x.pgm"]) == 2
