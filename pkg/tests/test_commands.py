import json
import os
import tempfile
from io import StringIO

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings, tag

from robustnas import rundir
from robustnas.constants import ExitCode
from robustnas.evo import dominates

SEARCH_CONFIG = {
    "population_size": 20,
    "max_generations": 40,
    "surrogate_update_interval": 20,
    "infill_count": 4,
    "initial_samples": 20,
}

TRAINING_CONFIG = {
    "n_train": 8,
    "n_val": 8,
    "width": 2,
    "final_width": 2,
    "epochs": 1,
    "final_epochs": 1,
    "batch_size": 8,
    "attack_steps": 1,
    "eval_pgd_steps": [1],
}


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        super().setUp()
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.root = directory.name

    def path(self, *names):
        return os.path.join(self.root, *names)

    def write_config(self, name, data):
        path = self.path(name)
        with open(path, "w") as file_:
            json.dump(data, file_)
        return path

    def call_command(self, *args, **options):
        stdout = StringIO()
        call_command(*args, no_color=True, stdout=stdout, **options)
        return stdout.getvalue()

    def assertExitCode(self, code, *args, **options):
        with self.assertRaises(CommandError) as context:
            self.call_command(*args, verbosity=0, **options)
        self.assertEqual(context.exception.returncode, code)
        return context.exception


class SearchCommandTests(CommandTestCase):
    def search(self, out, *args):
        config = self.write_config("search.json", SEARCH_CONFIG)
        return self.call_command("search", "--config", config, "--out", out, *args)

    def test_outputs(self):
        out = self.path("run")
        stdout = self.search(out)
        self.assertIn("Archived", stdout)
        for name in (
            rundir.ARCHIVE,
            rundir.CONFIG,
            rundir.HISTORY,
            rundir.SURROGATE_DATA,
            rundir.SURROGATE_MODEL,
            "manifest-search.json",
        ):
            self.assertTrue(os.path.isfile(os.path.join(out, name)), name)
        self.assertTrue(rundir.read_records(os.path.join(out, rundir.ARCHIVE)))
        self.assertEqual(len(rundir.read_history(os.path.join(out, rundir.HISTORY))), 40)
        self.assertEqual(
            len(rundir.read_csv(os.path.join(out, rundir.SURROGATE_DATA))), 24
        )
        manifest = rundir.RunManifest.load(out, "search")
        self.assertEqual(manifest.master_seed, 0)
        self.assertIsNotNone(manifest.finished_at)
        self.assertIn(rundir.ARCHIVE, manifest.outputs)

    def test_archive_independent_of_workers(self):
        self.search(self.path("one"), "--workers", "1")
        self.search(self.path("four"), "--workers", "4")
        with open(self.path("one", rundir.ARCHIVE), "rb") as one, open(
            self.path("four", rundir.ARCHIVE), "rb"
        ) as four:
            self.assertEqual(one.read(), four.read())

    def test_overrides(self):
        out = self.path("low")
        self.search(out, "--mode", "L", "--seed", "7")
        with open(os.path.join(out, rundir.CONFIG)) as file_:
            config = json.load(file_)
        self.assertEqual((config["mode"], config["master_seed"]), ("L", 7))
        self.assertFalse(os.path.exists(os.path.join(out, rundir.SURROGATE_MODEL)))

    def test_default_directory(self):
        with override_settings(ROBUSTNAS_OUTPUT_ROOT=self.root):
            self.call_command(
                "search",
                "--config",
                self.write_config("search.json", SEARCH_CONFIG),
                "--seed",
                "2",
                verbosity=0,
            )
        self.assertTrue(os.path.isfile(self.path("search-SH-rbf-2", rundir.ARCHIVE)))

    def test_invalid_configuration(self):
        self.assertExitCode(
            ExitCode.CONFIG, "search", "--config", self.path("missing.json")
        )
        config = self.write_config("bad.json", {**SEARCH_CONFIG, "max_generations": 30})
        self.assertExitCode(ExitCode.CONFIG, "search", "--config", config)
        self.assertExitCode(
            ExitCode.CONFIG, "search", "--evaluator", "unknown", "--out", self.root
        )
        self.assertExitCode(ExitCode.CONFIG, "search", "--workers", "0", "--out", self.root)

    def test_missing_checkpoint(self):
        self.assertExitCode(
            ExitCode.MISSING_ARTIFACT,
            "search",
            "--evaluator",
            "micronet",
            "--checkpoint",
            self.path("missing.pt"),
            "--out",
            self.path("run"),
        )


class ScreenAndReportTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        config = self.write_config("search.json", SEARCH_CONFIG)
        self.runs = []
        for mode in ("SH", "L"):
            out = self.path(mode)
            self.call_command(
                "search", "--config", config, "--mode", mode, "--out", out, verbosity=0
            )
            self.runs.append(out)

    def test_screen(self):
        stdout = self.call_command("screen", self.runs[0])
        self.assertIn("Kept", stdout)
        screened = rundir.read_records(os.path.join(self.runs[0], rundir.SCREENED))
        self.assertTrue(screened)
        for first in screened:
            self.assertTrue(first.has_high)
            for second in screened:
                self.assertFalse(dominates(first.high(), second.high()))

    def test_report(self):
        for run in self.runs:
            self.call_command("screen", run, verbosity=0)
        out = self.path("report")
        self.call_command("report", *self.runs, "--out", out, verbosity=0)
        report = rundir.read_csv(os.path.join(out, rundir.REPORT))
        self.assertEqual(len(report), 80)
        self.assertEqual(
            {(row["mode"], row["surrogate"]) for row in report}, {("SH", "rbf"), ("L", "")}
        )
        front = rundir.read_csv(os.path.join(out, rundir.FRONT))
        self.assertTrue(front)
        self.assertEqual(
            list(front[0]), ["mode", "surrogate", "run", "genome", "f1h", "f2h"]
        )

    def test_screen_missing_archive(self):
        self.assertExitCode(ExitCode.MISSING_ARTIFACT, "screen", self.path("nowhere"))

    def test_screen_empty_archive(self):
        rundir.write_records(os.path.join(self.runs[0], rundir.ARCHIVE), [])
        self.assertExitCode(ExitCode.MISSING_ARTIFACT, "screen", self.runs[0])

    def test_report_requires_screening(self):
        self.assertExitCode(ExitCode.MISSING_ARTIFACT, "report", self.runs[0])


@tag("slow")
class MicronetPipelineTests(CommandTestCase):
    def test_pipeline(self):
        training_config = self.write_config("training.json", TRAINING_CONFIG)
        supernet_dir = self.path("supernet")
        self.call_command(
            "train_supernet", "--config", training_config, "--out", supernet_dir, verbosity=0
        )
        for name in (rundir.CHECKPOINT, rundir.LOSS_LOG, rundir.CONFIG):
            self.assertTrue(os.path.isfile(os.path.join(supernet_dir, name)), name)
        self.assertEqual(len(rundir.read_csv(os.path.join(supernet_dir, rundir.LOSS_LOG))), 1)

        search_config = self.write_config(
            "search.json",
            {
                "population_size": 4,
                "max_generations": 2,
                "surrogate_update_interval": 1,
                "infill_count": 1,
                "initial_samples": 4,
                "low_fidelity_fraction": 0.5,
                "evaluator": "micronet",
            },
        )
        run_dir = self.path("run")
        self.call_command(
            "search",
            "--config",
            search_config,
            "--checkpoint",
            os.path.join(supernet_dir, rundir.CHECKPOINT),
            "--out",
            run_dir,
            verbosity=0,
        )
        self.call_command("screen", run_dir, verbosity=0)
        self.call_command("final_train", run_dir, "0", "--config", training_config, verbosity=0)
        (metrics,) = rundir.read_csv(os.path.join(run_dir, rundir.METRICS))
        self.assertEqual(metrics["index"], "0")
        self.assertIn("pgd1_error", metrics)
        self.assertTrue(0 <= float(metrics["clean_error"]) <= 1)

        self.assertExitCode(
            ExitCode.MISSING_ARTIFACT,
            "final_train",
            run_dir,
            "1000",
            "--config",
            training_config,
        )
