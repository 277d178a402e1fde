#!/usr/bin/env python3

import io
import json
import shutil
import tempfile
from contextlib import redirect_stdout
from pathlib import Path
from typing import List, Optional, Self, Tuple, Type
from unittest import TestCase

from rich.text import Text

from riskmdp import verify_report
from riskmdp.__main__ import ExitCode, main
from riskmdp.internals import console
from riskmdp.solver_report import read_report

from .mocks import MockModels


class TestCommandLine(TestCase):
    """
    TestCommandLine
    ---------------

    End-to-end runs of the command line interface against a temporary model
    file and an empty configuration, so that built-in defaults apply.
    """
    @classmethod
    def setUpClass(cls: Type[Self]) -> None:
        cls.folder = Path(tempfile.mkdtemp(prefix="riskmdp-"))
        cls.config = cls.folder / "riskmdp.ini"
        cls.model = cls.folder / "chain.json"
        cls.model.write_text(json.dumps(MockModels.two_state_document({"family": "avar", "alpha": 0.75})), encoding="utf-8")

    @classmethod
    def tearDownClass(cls: Type[Self]) -> None:
        shutil.rmtree(cls.folder, ignore_errors=True)

    def run_cli(self: Self, *argv: str, config: Optional[Path]=None) -> Tuple[int, List[str]]:
        """
        Run the command line interface and return its exit code with the
        printed lines as plain text, free of console styles.
        """
        with console.capture() as capture:
            code = main(["--config", str(config or self.config), *argv])

        return code, [line.strip() for line in Text.from_ansi(capture.get()).plain.splitlines()]

    def test_value_iteration(self: Self) -> None:
        # Act
        code, lines = self.run_cli("solve", "--model", str(self.model), "--tol", "1e-12")

        # Assert
        self.assertEqual(ExitCode.OK, code)
        self.assertTrue(any("3.000000000" in line for line in lines))
        self.assertIn("STATUS=converged", lines)

    def test_risk_override_diverges(self: Self) -> None:
        # Act
        code, lines = self.run_cli("solve", "--model", str(self.model), "--risk", "avar:0.4")

        # Assert
        self.assertEqual(ExitCode.DIVERGED, code)
        self.assertTrue(any("DIVERGENCE" in line for line in lines))

    def test_inconclusive_run(self: Self) -> None:
        # Act
        code, lines = self.run_cli("solve", "--model", str(self.model), "--max-iter", "3")

        # Assert
        self.assertEqual(ExitCode.INCONCLUSIVE, code)
        self.assertIn("STATUS=inconclusive", lines)

    def test_one_stage_report(self: Self) -> None:
        # Arrange
        out = self.folder / "finite.json"

        # Act
        code, lines = self.run_cli("solve", "--model", str(self.model), "--method", "finite:1", "--out", str(out))
        report = read_report(out)

        # Assert
        self.assertEqual(ExitCode.OK, code)
        self.assertTrue(any("1.000000000" in line for line in lines))
        self.assertEqual(1.0, report["values"]["1"])
        self.assertEqual(1, len(report["stages"]))
        self.assertEqual(0.0, verify_report(out))

    def test_policy_iteration_report_verifies(self: Self) -> None:
        # Arrange
        out = self.folder / "policy-iter.json"

        # Act
        code, _ = self.run_cli("solve", "--model", str(self.model), "--method", "policy-iter", "--tol", "1e-12", "--out", str(out))

        # Assert
        self.assertEqual(ExitCode.OK, code)
        self.assertLessEqual(verify_report(out), 1e-11)
        self.assertAlmostEqual(read_report(out)["residual"], verify_report(out), delta=1e-12)
        self.assertEqual({"family": "avar", "alpha": 0.75}, read_report(out)["model"]["risk"])

    def test_truncated_policy_evaluation_is_inconclusive(self: Self) -> None:
        # Act
        code, lines = self.run_cli("solve", "--model", str(self.model), "--method", "policy-iter", "--max-iter", "5")

        # Assert
        self.assertEqual(ExitCode.INCONCLUSIVE, code)
        self.assertIn("STATUS=inconclusive", lines)

    def test_check_transient(self: Self) -> None:
        # Act
        code, lines = self.run_cli("check-transient", "--model", str(self.model))

        # Assert
        self.assertEqual(ExitCode.OK, code)
        self.assertIn("transient, K=2.000000000", lines)

    def test_check_non_transient(self: Self) -> None:
        # Act
        code, lines = self.run_cli("check-transient", "--model", str(self.model), "--risk", "avar:0.5")

        # Assert
        self.assertEqual(ExitCode.DIVERGED, code)
        self.assertIn("non-transient, K=inf", lines)

    def test_missing_model(self: Self) -> None:
        # Act
        code, _ = self.run_cli("solve", "--model", str(self.folder / "missing.json"))

        # Assert
        self.assertEqual(ExitCode.INVALID, code)

    def test_malformed_model(self: Self) -> None:
        # Arrange
        broken = self.folder / "broken.json"
        broken.write_text("{\"states\": [", encoding="utf-8")

        # Act
        code, lines = self.run_cli("solve", "--model", str(broken))

        # Assert
        self.assertEqual(ExitCode.INVALID, code)
        self.assertTrue(any("malformed JSON" in line for line in lines))

    def test_usage_errors_exit_with_one(self: Self) -> None:
        for argv in (["solve", "--model", str(self.model), "--method", "finite:0"], ["solve", "--risk", "avar:2"]):
            with self.assertRaises(SystemExit) as context, redirect_stdout(io.StringIO()):
                self.run_cli(*argv)

            self.assertEqual(1, context.exception.code)

    def test_asset_selling_example(self: Self) -> None:
        # Act
        code, lines = self.run_cli("example", "asset-selling", "--pmf", ",".join(["0.1"] * 10), "--c0", "1")

        # Assert
        self.assertEqual(ExitCode.OK, code)
        self.assertIn("X_STAR=5", lines)

    def test_transplant_example(self: Self) -> None:
        # Act
        code, lines = self.run_cli("example", "transplant", "--kappa", "0")

        # Assert
        self.assertEqual(ExitCode.OK, code)
        self.assertIn("ACTION=W", lines)

    def test_out_of_range_config(self: Self) -> None:
        # Arrange
        config = self.folder / "broken.ini"
        config.write_text("[solver]\ntol = -1\n", encoding="utf-8")

        # Act
        code, lines = self.run_cli("solve", "--model", str(self.model), config=config)

        # Assert
        self.assertEqual(ExitCode.INVALID, code)
        self.assertTrue(any("tol must be positive" in line for line in lines))
