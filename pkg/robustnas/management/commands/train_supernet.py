import os

from robustnas import rundir
from robustnas.config import load_training_config
from robustnas.management.base import RunCommand
from robustnas.micronet.training import adv_train_supernet, save_supernet


class Command(RunCommand):
    help = "Adversarially train a weight-sharing supernet on the synthetic dataset."

    def add_arguments(self, parser):
        parser.add_argument("--config", default=None, help="JSON training configuration.")
        parser.add_argument("--seed", type=int, default=None, help="Override the seed.")
        self.add_out_argument(parser, "Directory receiving the checkpoint and loss log.")

    def handle(self, *args, config, seed, out, verbosity, **options):
        with self.exit_codes():
            training_config = load_training_config(config, seed=seed)
            directory = out or self.default_directory(f"supernet-{training_config.seed}")
            manifest = rundir.RunManifest.start(
                "train_supernet",
                training_config.to_dict(),
                training_config.seed,
                directory,
                arguments={"config": config},
            )
            rundir.write_json(
                os.path.join(directory, rundir.CONFIG), training_config.to_dict()
            )

            def progress(log):
                self.log(
                    verbosity,
                    f"Epoch {log.epoch}: adv_loss={log.adv_loss:.4f} "
                    f"clean_val_err={log.clean_val_err:.4f} "
                    f"adv_val_err={log.adv_val_err:.4f}",
                    level=2,
                )

            supernet, history = adv_train_supernet(training_config, progress=progress)
            checkpoint = os.path.join(directory, rundir.CHECKPOINT)
            save_supernet(supernet, training_config, checkpoint)
            rundir.write_csv(
                os.path.join(directory, rundir.LOSS_LOG),
                ("epoch", "adv_loss", "clean_val_err", "adv_val_err"),
                history,
            )
            manifest.finish([rundir.CONFIG, rundir.CHECKPOINT, rundir.LOSS_LOG])
        self.log(verbosity, f"Supernet checkpoint written to {checkpoint}")
