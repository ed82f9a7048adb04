import os

from django.core.management import CommandError

from robustnas import rundir
from robustnas.config import load_training_config
from robustnas.constants import ExitCode
from robustnas.genome import to_string
from robustnas.management.base import RunCommand, require_file
from robustnas.micronet.training import train_standalone


class Command(RunCommand):
    help = "Adversarially train a screened architecture from scratch and report its errors."

    def add_arguments(self, parser):
        parser.add_argument("run_dir", help="Directory of a screened search.")
        parser.add_argument("index", type=int, help="Row of screened.csv to train.")
        parser.add_argument("--config", default=None, help="JSON training configuration.")
        parser.add_argument("--seed", type=int, default=None, help="Override the seed.")
        self.add_out_argument(parser, "Directory receiving metrics.csv.")

    def handle(self, *args, run_dir, index, config, seed, out, verbosity, **options):
        with self.exit_codes():
            training_config = load_training_config(config, seed=seed)
            try:
                screened = rundir.read_records(require_file(run_dir, rundir.SCREENED))
            except ValueError as exc:
                raise CommandError(str(exc), returncode=ExitCode.MISSING_ARTIFACT)
            if not 0 <= index < len(screened):
                raise CommandError(
                    f"Index {index} is out of range, {run_dir} has "
                    f"{len(screened)} screened architectures.",
                    returncode=ExitCode.MISSING_ARTIFACT,
                )
            genome = screened[index].genome
            directory = out or run_dir
            manifest = rundir.RunManifest.start(
                "final_train",
                training_config.to_dict(),
                training_config.seed,
                directory,
                arguments={"run_dir": run_dir, "index": index},
            )
            self.log(verbosity, f"Training {to_string(genome)} from scratch", level=2)
            _, metrics = train_standalone(genome, training_config)
            rundir.write_csv(
                os.path.join(directory, rundir.METRICS),
                ("index", "genome", *metrics),
                [(index, to_string(genome), *metrics.values())],
            )
            manifest.finish([rundir.METRICS])
        self.log(
            verbosity,
            ", ".join(f"{name}={value}" for name, value in metrics.items()),
        )
