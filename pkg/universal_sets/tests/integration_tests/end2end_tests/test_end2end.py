import glob
import logging
import os
from unittest import TestCase

import yaml

from universal_sets.driver import EXIT_FALSE, execute
from universal_sets.util import read_csv, read_trace

CUR_DIR = os.path.dirname(__file__)
WORKING_DIR = os.path.join(CUR_DIR, "working_dir/")
INPUT_FILE = os.path.join(CUR_DIR, "test_data/inputs.yml")
SET_FILE = os.path.join(CUR_DIR, "test_data/five_optimal.json")


class End2End(TestCase):

    def setUp(self) -> None:
        files = glob.glob(f"{WORKING_DIR}/*")
        for file in files:
            if "README.md" not in file:
                os.remove(file)

    def test_e2e(self):
        with open(INPUT_FILE) as file:
            inputs = yaml.safe_load(file)

        # Outputs are relative names in the yml file; place them in the working dir
        for key, section in inputs.items():
            for name in ("output", "trace", "csv"):
                if name in section:
                    section[name] = os.path.join(WORKING_DIR, section[name])
        inputs["check_inputs"]["set"] = SET_FILE

        # Log INFO to console
        fh = logging.StreamHandler()
        fh.setLevel("INFO")
        fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
        logger = logging.getLogger("universal_sets")
        logger.addHandler(fh)
        logger.setLevel("INFO")

        try:
            code = execute(inputs)
        finally:
            logger.removeHandler(fh)

        # The potential check may come out either way; everything else succeeds
        self.assertLessEqual(code, EXIT_FALSE)
        for name in ("factorial.json", "check.json", "trace.json", "search.json", "gamma.json",
                     "bound.json", "potential.json", "simulate.json", "gamma.csv", "sweep.csv"):
            self.assertTrue(os.path.isfile(os.path.join(WORKING_DIR, name)), msg=f"{name} was not written")

        ctx, chain = read_trace(os.path.join(WORKING_DIR, "trace.json"))
        self.assertEqual(len(chain), 9)
        config, table = read_csv(os.path.join(WORKING_DIR, "sweep.csv"))
        self.assertEqual(config["subcommand"], "simulate")
        self.assertEqual(list(table["M"]), [4, 16])
