import os

from django.core.management import CommandError

from robustnas import rundir
from robustnas.archive import secondary_screening
from robustnas.config import load_search_config
from robustnas.constants import ExitCode
from robustnas.evaluators import get_evaluator
from robustnas.management.base import RunCommand, require_file


class Command(RunCommand):
    help = "Re-evaluate an archive at high fidelity and keep its non-dominated members."

    def add_arguments(self, parser):
        parser.add_argument("run_dir", help="Directory of a completed search.")
        self.add_workers_argument(parser)

    def handle(self, *args, run_dir, workers, verbosity, **options):
        with self.exit_codes():
            archive_path = require_file(run_dir, rundir.ARCHIVE)
            search_config = load_search_config(require_file(run_dir, rundir.CONFIG))
            try:
                records = rundir.read_records(archive_path)
            except ValueError as exc:
                raise CommandError(str(exc), returncode=ExitCode.MISSING_ARTIFACT)
            if not records:
                raise CommandError(
                    f"The archive of {run_dir} is empty.",
                    returncode=ExitCode.MISSING_ARTIFACT,
                )
            workers = self.workers(workers)
            manifest = rundir.RunManifest.start(
                "screen",
                search_config.to_dict(),
                search_config.master_seed,
                run_dir,
                arguments={"workers": workers},
            )
            evaluator = get_evaluator(search_config)
            screened = secondary_screening(records, evaluator.evaluate_high, workers)
            rundir.write_records(os.path.join(run_dir, rundir.SCREENED), screened)
            manifest.finish([rundir.SCREENED])
        self.log(
            verbosity,
            f"Kept {len(screened)} of {len(records)} archived architectures.",
        )
