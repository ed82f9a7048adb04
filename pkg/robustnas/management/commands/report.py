import json
import os
from typing import Dict, List, Tuple

from django.core.management import CommandError

from robustnas import rundir
from robustnas.archive import EvaluationRecord
from robustnas.constants import ExitCode, Mode
from robustnas.evo import nondominated_fronts
from robustnas.genome import to_string
from robustnas.management.base import RunCommand, require_file


def run_label(config: dict) -> Tuple[str, str]:
    """Return the (mode, surrogate) pair labelling a run."""
    mode = config.get("mode", Mode.SURROGATE_HELPER.value)
    if mode in (Mode.HIGH.value, Mode.LOW.value):
        return mode, ""
    return mode, config.get("surrogate", "")


class Command(RunCommand):
    help = "Merge completed runs into per-mode front and hypervolume tables."

    def add_arguments(self, parser):
        parser.add_argument("run_dirs", nargs="+", help="Directories of screened runs.")
        self.add_out_argument(parser, "Directory receiving report.csv and front.csv.")

    def handle(self, *args, run_dirs, out, verbosity, **options):
        with self.exit_codes():
            fronts: Dict[Tuple[str, str], List[Tuple[str, EvaluationRecord]]] = {}
            hypervolumes = []
            for run_dir in run_dirs:
                with open(require_file(run_dir, rundir.CONFIG)) as file_:
                    label = run_label(json.load(file_))
                try:
                    screened = rundir.read_records(require_file(run_dir, rundir.SCREENED))
                except ValueError as exc:
                    raise CommandError(str(exc), returncode=ExitCode.MISSING_ARTIFACT)
                fronts.setdefault(label, []).extend(
                    (run_dir, record) for record in screened
                )
                for entry in rundir.read_history(require_file(run_dir, rundir.HISTORY)):
                    hypervolumes.append(
                        (
                            *label,
                            run_dir,
                            entry["generation"],
                            entry["archive_size"],
                            entry["hypervolume"],
                        )
                    )
            directory = out or self.default_directory("report")
            manifest = rundir.RunManifest.start(
                "report", {}, None, directory, arguments={"run_dirs": list(run_dirs)}
            )
            rows = []
            for (mode, kind), members in fronts.items():
                if not members:
                    continue
                front = nondominated_fronts([record.high() for _, record in members])[0]
                for index in front:
                    run_dir, record = members[index]
                    rows.append(
                        (
                            mode,
                            kind,
                            run_dir,
                            to_string(record.genome),
                            record.f1h,
                            record.f2h,
                        )
                    )
            rundir.write_csv(
                os.path.join(directory, rundir.FRONT),
                ("mode", "surrogate", "run", "genome", "f1h", "f2h"),
                rows,
            )
            rundir.write_csv(
                os.path.join(directory, rundir.REPORT),
                ("mode", "surrogate", "run", "generation", "archive_size", "hypervolume"),
                hypervolumes,
            )
            manifest.finish([rundir.FRONT, rundir.REPORT])
        self.log(verbosity, f"Reported {len(run_dirs)} runs in {directory}")
