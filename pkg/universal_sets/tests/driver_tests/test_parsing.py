import copy
import json
import os
import tempfile
import unittest
from unittest import mock

import yaml
from schema import SchemaError

import universal_sets.driver as driver

CUR_DIR = os.path.dirname(__file__)
FIVE_OPTIMAL = os.path.join(CUR_DIR, "test_data/five_optimal.json")
BROKEN_YML = os.path.join(CUR_DIR, "test_data/broken.yml")


def _read_output(path):
    with open(path, "r") as file:
        return json.load(file)


class TestFactorialParsing(unittest.TestCase):
    VALID_INPUTS = {"field": "Q(i)", "n": 5}

    def setUp(self) -> None:
        self.inputs = copy.deepcopy(self.VALID_INPUTS)
        self.directory = tempfile.TemporaryDirectory()
        self.inputs["output"] = os.path.join(self.directory.name, "factorial.json")

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_valid(self):
        """Test the factorization written for 5!_K in Z[i]"""
        code = driver.run_factorial(driver.RunConfig("factorial", self.inputs))
        self.assertEqual(code, driver.EXIT_OK)
        document = _read_output(self.inputs["output"])
        self.assertEqual(document["norm"], "200")
        self.assertEqual(document["config"]["subcommand"], "factorial")
        self.assertEqual(document["config"]["inputs"]["field"], "Q(i)")

    def test_field(self):
        """Test malformed and non squarefree fields"""
        for value in ["Q(sqrt 4)", "K", 5]:
            self.inputs["field"] = value
            with self.assertRaises(SchemaError, msg=f"{value!r} should be refused"):
                driver.run_factorial(driver.RunConfig("factorial", self.inputs))

    def test_degree(self):
        """Test negative and non-integer degrees"""
        for value in [-1, "5", 2.5]:
            self.inputs["n"] = value
            with self.assertRaises(SchemaError):
                driver.run_factorial(driver.RunConfig("factorial", self.inputs))


class TestCheckParsing(unittest.TestCase):
    VALID_INPUTS = {"field": "Q(i)", "set": FIVE_OPTIMAL, "n": 5, "optimal": True}

    def setUp(self) -> None:
        self.inputs = copy.deepcopy(self.VALID_INPUTS)
        self.directory = tempfile.TemporaryDirectory()
        self.inputs["output"] = os.path.join(self.directory.name, "check.json")

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_valid(self):
        """Test certifying the 5-optimal set"""
        code = driver.run_check(driver.RunConfig("check", self.inputs))
        self.assertEqual(code, driver.EXIT_OK)
        document = _read_output(self.inputs["output"])
        self.assertTrue(document["universal"])
        self.assertTrue(document["optimal"])
        self.assertEqual(document["volume_norm"], "40960000")

    def test_false_verdict(self):
        """Test that a failed check exits with the false code"""
        self.inputs["n"] = 6
        self.assertEqual(driver.run_check(driver.RunConfig("check", self.inputs)), driver.EXIT_FALSE)
        self.inputs["n"] = 5
        self.inputs["newton"] = True
        self.assertEqual(driver.run_check(driver.RunConfig("check", self.inputs)), driver.EXIT_FALSE)
        self.assertLessEqual(_read_output(self.inputs["output"])["newton_length"], 3)

    def test_set_file(self):
        """Test missing set files"""
        self.inputs["set"] = os.path.join(CUR_DIR, "test_data/missing.json")
        with self.assertRaises(ValueError):
            driver.run_check(driver.RunConfig("check", self.inputs))
        self.inputs["set"] = 12
        with self.assertRaises(SchemaError):
            driver.run_check(driver.RunConfig("check", self.inputs))

    def test_factor_bound(self):
        """Test the trial division bound"""
        self.inputs["factor_bound"] = 0
        with self.assertRaises(SchemaError):
            driver.run_check(driver.RunConfig("check", self.inputs))


class TestSearchParsing(unittest.TestCase):
    VALID_INPUTS = {"field": "Q(i)", "n": 2, "box": "3x3"}

    def setUp(self) -> None:
        self.inputs = copy.deepcopy(self.VALID_INPUTS)
        self.directory = tempfile.TemporaryDirectory()
        self.inputs["output"] = os.path.join(self.directory.name, "search.json")

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_valid(self):
        """Test the search document"""
        code = driver.run_search(driver.RunConfig("search", self.inputs))
        self.assertEqual(code, driver.EXIT_OK)
        document = _read_output(self.inputs["output"])
        self.assertEqual(document["box"], "3x3")
        self.assertTrue(document["sets"])
        self.assertIn("justification", document)

    def test_box(self):
        """Test malformed boxes"""
        for value in ["3by3", "0x3", 3]:
            self.inputs["box"] = value
            with self.assertRaises(SchemaError, msg=f"{value!r} should be refused"):
                driver.run_search(driver.RunConfig("search", self.inputs))

    def test_budget(self):
        """Test the node budget"""
        self.inputs["budget"] = 0
        with self.assertRaises(SchemaError):
            driver.run_search(driver.RunConfig("search", self.inputs))


class TestAnalyticsParsing(unittest.TestCase):

    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()
        self.output = os.path.join(self.directory.name, "out.json")

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_gamma(self):
        """Test the gamma estimate and its trajectory table"""
        csv = os.path.join(self.directory.name, "trajectory.csv")
        inputs = {"field": "Q", "n": 1000, "csv": csv, "output": self.output}
        self.assertEqual(driver.run_gamma(driver.RunConfig("gamma", inputs)), driver.EXIT_OK)
        self.assertAlmostEqual(_read_output(self.output)["estimate"], 0.5772, delta=0.01)
        self.assertTrue(os.path.exists(csv))
        inputs["n"] = 1
        with self.assertRaises(SchemaError):
            driver.run_gamma(driver.RunConfig("gamma", inputs))

    def test_bound(self):
        """Test the tolerance of the bound check"""
        inputs = {"field": "Q(sqrt 5)", "n": 500, "tol": -1, "output": self.output}
        with self.assertRaises(SchemaError):
            driver.run_bound(driver.RunConfig("bound", inputs))

    def test_potential(self):
        """Test inline boxes and refused box lists"""
        inputs = {"boxes": '[{"lower": [0], "upper": [1]}]', "samples": 1000, "output": self.output}
        self.assertEqual(driver.run_potential(driver.RunConfig("potential", inputs)), driver.EXIT_OK)
        self.assertAlmostEqual(_read_output(self.output)["measure"], 1.0)
        inputs["boxes"] = []
        with self.assertRaises(ValueError):
            driver.run_potential(driver.RunConfig("potential", inputs))
        inputs["boxes"] = [{"lower": [0]}]
        with self.assertRaises(SchemaError):
            driver.run_potential(driver.RunConfig("potential", inputs))
        inputs["boxes"] = os.path.join(CUR_DIR, "test_data/missing.json")
        with self.assertRaises(ValueError):
            driver.run_potential(driver.RunConfig("potential", inputs))


class TestSimulateParsing(unittest.TestCase):
    VALID_INPUTS = {"field": "Q(i)", "n": 1, "L": 5, "M": 4, "trials": 3}

    def setUp(self) -> None:
        self.inputs = copy.deepcopy(self.VALID_INPUTS)
        self.directory = tempfile.TemporaryDirectory()
        self.inputs["output"] = os.path.join(self.directory.name, "simulate.json")

    def tearDown(self) -> None:
        self.directory.cleanup()

    def test_valid(self):
        """Test the simulation document"""
        self.inputs["tail"] = True
        code = driver.run_simulate(driver.RunConfig("simulate", self.inputs))
        self.assertEqual(code, driver.EXIT_OK)
        document = _read_output(self.inputs["output"])
        self.assertEqual(document["modulus"], "10")
        self.assertEqual(len(document["base_points"]), 3)
        self.assertIn("tail_fraction", document)

    def test_modulus(self):
        """Test the scaling mode names"""
        self.inputs["modulus"] = "lcm"
        with self.assertRaises(SchemaError):
            driver.run_simulate(driver.RunConfig("simulate", self.inputs))

    def test_cutoff(self):
        """Test that L must exceed 2(n+1)"""
        self.inputs["L"] = 4
        with self.assertRaises(ValueError):
            driver.run_simulate(driver.RunConfig("simulate", self.inputs))


class TestRunConfig(unittest.TestCase):

    def test_valid(self):
        """Test the reproducibility record"""
        config = driver.RunConfig("check", {"n": 1}, 2)
        self.assertEqual(config.to_dict(), {"subcommand": "check", "inputs": {"n": 1}, "threads": 2})

    def test_invalid(self):
        """Test unknown subcommands and thread counts"""
        with self.assertRaises(SchemaError):
            driver.RunConfig("unknown")
        with self.assertRaises(SchemaError):
            driver.RunConfig("check", {}, 0)

    def test_default_threads(self):
        """Test the thread count environment variable"""
        with mock.patch.dict(os.environ, {driver.THREADS_VARIABLE: "3"}):
            self.assertEqual(driver.default_threads(), 3)
        with mock.patch.dict(os.environ, {driver.THREADS_VARIABLE: "many"}):
            with self.assertRaises(SchemaError):
                driver.default_threads()
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(driver.default_threads(), 1)


class TestBatch(unittest.TestCase):

    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self) -> None:
        self.directory.cleanup()

    def _write(self, inputs):
        path = os.path.join(self.directory.name, "inputs.yml")
        with open(path, "w") as file:
            yaml.safe_dump(inputs, file)
        return path

    def test_sections(self):
        """Test that the largest exit code of the sections is returned"""
        inputs = {"factorial_inputs": {"field": "Q(i)", "n": 4,
                                       "output": os.path.join(self.directory.name, "factorial.json")},
                  "check_inputs": {"field": "Q(i)", "set": FIVE_OPTIMAL, "n": 6,
                                   "output": os.path.join(self.directory.name, "check.json")}}
        self.assertEqual(driver.read_and_run(self._write(inputs)), driver.EXIT_FALSE)
        self.assertEqual(_read_output(inputs["factorial_inputs"]["output"])["norm"], "8")

    def test_unknown_section(self):
        """Test that unknown sections are refused"""
        with self.assertRaises(SchemaError):
            driver.read_and_run(self._write({"walk_inputs": {}}))

    def test_unreadable(self):
        """Test broken, missing and non-mapping files"""
        self.assertEqual(driver.read_and_run(BROKEN_YML), driver.EXIT_INPUT)
        self.assertEqual(driver.read_and_run(os.path.join(CUR_DIR, "test_data/missing.yml")), driver.EXIT_INPUT)
        self.assertEqual(driver.read_and_run(self._write([1, 2])), driver.EXIT_INPUT)


class TestCommandLine(unittest.TestCase):

    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()
        self.prefix = ["--log-file", os.path.join(self.directory.name, "run.log")]

    def tearDown(self) -> None:
        self.directory.cleanup()

    def _exit_code(self, argv):
        with self.assertRaises(SystemExit) as context:
            driver.main(self.prefix + argv)
        return context.exception.code

    def test_check(self):
        """Test certifying a set from the command line"""
        output = os.path.join(self.directory.name, "check.json")
        code = self._exit_code(["check", "--field", "Q(i)", "--n", "5", "--set", FIVE_OPTIMAL,
                                "--optimal", "--output", output])
        self.assertEqual(code, driver.EXIT_OK)
        self.assertEqual(_read_output(output)["config"]["inputs"]["set"], FIVE_OPTIMAL)

    def test_empty_search(self):
        """Test that an empty search exits with the false code"""
        output = os.path.join(self.directory.name, "search.json")
        code = self._exit_code(["search-optimal", "--field", "Q(i)", "--n", "4", "--box", "4x4",
                                "--output", output])
        self.assertEqual(code, driver.EXIT_FALSE)
        self.assertEqual(_read_output(output)["sets"], [])

    def test_input_errors(self):
        """Test that invalid inputs exit with the input code"""
        self.assertEqual(self._exit_code(["factorial", "--field", "Q(sqrt 4)", "--n", "3"]), driver.EXIT_INPUT)
        self.assertEqual(self._exit_code(["check", "--field", "Q(i)", "--n", "1", "--set",
                                          os.path.join(CUR_DIR, "test_data/missing.json")]), driver.EXIT_INPUT)
        self.assertEqual(self._exit_code(["simulate", "--field", "Q(i)", "--n", "1", "--L", "5", "--M", "2",
                                          "--trials", "1", "--sweep-M", "1,x"]), driver.EXIT_INPUT)
        self.assertEqual(self._exit_code(["factorial", "--field", "Q"]), 2, msg="argparse refuses a missing --n")

    def test_tuning_flags(self):
        """Test that guards and bounds set in YAML can also be given as flags"""
        parser = driver.build_parser()
        inputs = driver._inputs_from_args(parser.parse_args(
            ["construct", "--field", "Q(i)", "--n", "3", "--residue-guard", "500", "--factor-bound", "1000"]))
        self.assertEqual((inputs["residue_guard"], inputs["factor_bound"]), (500, 1000))
        inputs = driver._inputs_from_args(parser.parse_args(["construct", "--field", "Q(i)", "--n", "3"]))
        self.assertNotIn("residue_guard", inputs, msg="unset flags must fall back to the section defaults")

        inputs = driver._inputs_from_args(parser.parse_args(
            ["check", "--field", "Q(i)", "--n", "5", "--set", FIVE_OPTIMAL, "--factor-bound", "100"]))
        self.assertEqual(inputs["factor_bound"], 100)

        output = os.path.join(self.directory.name, "potential.json")
        code = self._exit_code(["potential", "--boxes", '[{"lower": [0, 0], "upper": [1, 1]}]', "--samples", "2000",
                                "--field", "Q(sqrt 5)", "--gamma-n", "1000", "--tol", "0.5", "--output", output])
        self.assertIn(code, (driver.EXIT_OK, driver.EXIT_FALSE))
        written = _read_output(output)["config"]["inputs"]
        self.assertEqual((written["gamma_n"], written["tol"]), (1000, 0.5))

        self.assertEqual(self._exit_code(["construct", "--field", "Q(i)", "--n", "2", "--residue-guard", "0"]),
                         driver.EXIT_INPUT)

    def test_budget_failure(self):
        """Test that an exhausted budget exits with the failure code"""
        code = self._exit_code(["search-optimal", "--field", "Q(i)", "--n", "3", "--box", "3x3",
                                "--budget", "5"])
        self.assertEqual(code, driver.EXIT_FAILURE)

    def test_log_file(self):
        """Test that the run is logged to the requested file"""
        self._exit_code(["--log-level", "DEBUG", "factorial", "--field", "Q", "--n", "3",
                         "--output", os.path.join(self.directory.name, "f.json")])
        self.assertTrue(os.path.exists(self.prefix[1]))
