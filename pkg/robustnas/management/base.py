import os
from contextlib import contextmanager
from typing import Iterator

from django.core.exceptions import ImproperlyConfigured
from django.core.management import BaseCommand, CommandError

from .. import conf
from ..constants import ExitCode
from ..exceptions import (
    CheckpointError,
    ConfigError,
    EmptyInput,
    EvaluatorUnavailable,
    NumericFailure,
)


class RunCommand(BaseCommand):
    """
    Base of the pipeline commands translating library failures into the
    process exit code contract.
    """

    def add_workers_argument(self, parser):
        parser.add_argument(
            "--workers",
            type=int,
            default=None,
            help="Maximum number of concurrent evaluations.",
        )

    def add_out_argument(self, parser, help):
        parser.add_argument("--out", default=None, help=help)

    def default_directory(self, name: str) -> str:
        return os.path.join(conf.OUTPUT_ROOT, name)

    def workers(self, workers) -> int:
        workers = conf.WORKERS if workers is None else workers
        if workers < 1:
            raise CommandError(
                f"--workers must be positive, got {workers}.",
                returncode=ExitCode.CONFIG,
            )
        return workers

    def log(self, verbosity: int, message: str, level: int = 1) -> None:
        if verbosity >= level:
            self.stdout.write(message)

    @contextmanager
    def exit_codes(self) -> Iterator[None]:
        try:
            yield
        except CommandError:
            raise
        except (ConfigError, ImproperlyConfigured) as exc:
            raise CommandError(str(exc), returncode=ExitCode.CONFIG) from exc
        except (EvaluatorUnavailable, CheckpointError, EmptyInput) as exc:
            raise CommandError(str(exc), returncode=ExitCode.MISSING_ARTIFACT) from exc
        except NumericFailure as exc:
            raise CommandError(str(exc), returncode=ExitCode.NUMERIC) from exc
        except OSError as exc:
            raise CommandError(str(exc), returncode=ExitCode.IO) from exc


def require_file(directory: str, name: str) -> str:
    path = os.path.join(directory, name)
    if not os.path.isfile(path):
        raise CommandError(
            f"Missing {name} in {directory}.", returncode=ExitCode.MISSING_ARTIFACT
        )
    return path
