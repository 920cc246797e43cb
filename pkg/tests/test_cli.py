import filecmp

from ildars.cli import main


class TestCombosCommand:
    def test_lists_78_ids(self, capsys):
        assert main(["combos"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 78
        assert lines[0] == "IALC"
        assert all(len(line) == 4 for line in lines)
        assert len(set(lines)) == 78

    def test_extended_implies_average(self, capsys):
        main(["combos"])
        lines = capsys.readouterr().out.strip().splitlines()
        for token in lines:
            if token[3] == "E":
                assert token[2] == "U"


class TestRunCommand:
    def test_zero_error_run_writes_reports(self, tmp_path, capsys):
        code = main(
            [
                "run",
                "--experiments", "1",
                "--zero-error",
                "--combos", "I,A",
                "--seed", "3",
                "--out", str(tmp_path / "out"),
                "--dump-offsets",
            ]
        )
        assert code == 0
        out = tmp_path / "out"
        for name in (
            "ranking_mean.csv",
            "ranking_median.csv",
            "ranking_std.csv",
            "summary.json",
            "offsets.csv",
        ):
            assert (out / name).exists()

    def test_identical_flags_identical_outputs(self, tmp_path):
        args = [
            "run",
            "--experiments", "2",
            "--combos", "I,A,N",
            "--seed", "17",
        ]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        for name in ("ranking_mean.csv", "ranking_median.csv", "ranking_std.csv", "summary.json"):
            assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)

    def test_bad_combo_token_fails(self, tmp_path, capsys):
        code = main(
            ["run", "--experiments", "1", "--combos", "Z", "--out", str(tmp_path)]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err
