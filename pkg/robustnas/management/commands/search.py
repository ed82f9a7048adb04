import os

from robustnas import rundir
from robustnas.config import load_search_config
from robustnas.constants import Mode, SurrogateKind
from robustnas.evaluators import get_evaluator
from robustnas.management.base import RunCommand
from robustnas.search import run_search
from robustnas.surrogate import dump_model


class Command(RunCommand):
    help = "Run the bi-fidelity evolutionary architecture search."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None, help="JSON search configuration.")
        parser.add_argument(
            "--seed", type=int, default=None, help="Override the master seed."
        )
        parser.add_argument(
            "--mode",
            choices=[mode.value for mode in Mode],
            default=None,
            help="Objectives driving selection.",
        )
        parser.add_argument(
            "--surrogate",
            choices=[kind.value for kind in SurrogateKind],
            default=None,
            help="Surrogate model family.",
        )
        parser.add_argument(
            "--evaluator", default=None, help="Name of the evaluator backend."
        )
        parser.add_argument(
            "--checkpoint", default=None, help="Supernet checkpoint of the micronet evaluator."
        )
        self.add_workers_argument(parser)
        self.add_out_argument(parser, "Run directory.")

    def handle(
        self,
        *args,
        config,
        seed,
        mode,
        surrogate: str,
        evaluator,
        checkpoint,
        workers,
        out,
        verbosity,
        **options,
    ):
        with self.exit_codes():
            search_config = load_search_config(
                config,
                master_seed=seed,
                mode=mode,
                surrogate=surrogate,
                evaluator=evaluator,
                checkpoint=checkpoint,
            )
            workers = self.workers(workers)
            directory = out or self.default_directory(
                f"search-{search_config.mode.value}-{search_config.surrogate.value}"
                f"-{search_config.master_seed}"
            )
            backend = get_evaluator(search_config)
            manifest = rundir.RunManifest.start(
                "search",
                search_config.to_dict(),
                search_config.master_seed,
                directory,
                arguments={"config": config, "workers": workers},
            )
            rundir.write_json(
                os.path.join(directory, rundir.CONFIG), search_config.to_dict()
            )
            result = run_search(search_config, backend, workers)
            outputs = [
                rundir.CONFIG,
                rundir.ARCHIVE,
                rundir.HISTORY,
                rundir.SURROGATE_DATA,
            ]
            rundir.write_records(
                os.path.join(directory, rundir.ARCHIVE), result.archive.records
            )
            rundir.write_history(
                os.path.join(directory, rundir.HISTORY),
                (log._asdict() for log in result.history),
            )
            rundir.write_training_set(
                os.path.join(directory, rundir.SURROGATE_DATA), result.training_set
            )
            if result.surrogate is not None:
                dump_model(
                    result.surrogate, os.path.join(directory, rundir.SURROGATE_MODEL)
                )
                outputs.append(rundir.SURROGATE_MODEL)
            manifest.finish(outputs)
        if result.budget_exhausted:
            self.log(verbosity, "Wall clock budget exhausted, stopped early.")
        self.log(
            verbosity,
            f"Archived {len(result.archive)} architectures after "
            f"{len(result.history)} generations and "
            f"{result.high_fidelity_evaluations} high-fidelity evaluations in {directory}",
        )
