import numpy as np
import torch
import torch.nn.functional as F
from django.test import SimpleTestCase
from scipy import stats

from robustnas.constants import AttackKind
from robustnas.exceptions import ConfigError
from robustnas.genome import random_genome, validate
from robustnas.micronet.attacks import AttackSpec, attack, fgsm, pgd
from robustnas.micronet.data import synth_dataset
from robustnas.micronet.network import Supernet

EPSILON = 8 / 255


def summed(x):
    return x.sum(dim=(1, 2, 3))


def squared_error(outputs, targets):
    return ((outputs - targets) ** 2).sum()


class AttackSpecTests(SimpleTestCase):
    def test_defaults(self):
        spec = AttackSpec()
        self.assertIs(spec.kind, AttackKind.PGD)
        self.assertTrue(spec.random_start)
        self.assertEqual(spec.label, "pgd7")
        self.assertFalse(AttackSpec.fgsm().random_start)
        self.assertEqual(AttackSpec.fgsm().label, "fgsm")

    def test_invalid(self):
        for kwargs in ({"epsilon": -0.1}, {"steps": 0}, {"kind": "cw"}):
            with self.subTest(**kwargs):
                with self.assertRaises((ConfigError, ValueError)):
                    AttackSpec(**kwargs)

    def test_kind_mismatch(self):
        inputs = torch.full((1, 1, 8, 8), 0.5, dtype=torch.float64)
        with self.assertRaises(ConfigError):
            fgsm(summed, inputs, torch.zeros(1), AttackSpec.pgd())
        with self.assertRaises(ConfigError):
            pgd(summed, inputs, torch.zeros(1), AttackSpec.fgsm())


class LinearModelTests(SimpleTestCase):
    def setUp(self):
        self.inputs = torch.full((2, 1, 8, 8), 0.5, dtype=torch.float64)
        self.targets = torch.zeros(2, dtype=torch.float64)

    def test_fgsm_moves_up_the_gradient(self):
        adversarial = fgsm(
            summed, self.inputs, self.targets, AttackSpec.fgsm(EPSILON), squared_error
        )
        torch.testing.assert_close(adversarial, self.inputs + EPSILON, rtol=0, atol=1e-12)

    def test_pgd_saturates(self):
        spec = AttackSpec.pgd(7, random_start=False)
        adversarial = pgd(summed, self.inputs, self.targets, spec, loss_fn=squared_error)
        torch.testing.assert_close(adversarial, self.inputs + EPSILON, rtol=0, atol=1e-12)

    def test_fgsm_clips(self):
        inputs = torch.full((1, 1, 8, 8), 0.99, dtype=torch.float64)
        adversarial = fgsm(
            summed, inputs, torch.zeros(1, dtype=torch.float64), AttackSpec.fgsm(), squared_error
        )
        self.assertTrue(torch.equal(adversarial, torch.ones_like(inputs)))

    def test_zero_epsilon(self):
        generator = torch.Generator().manual_seed(0)
        for spec in (AttackSpec.fgsm(0.0), AttackSpec.pgd(epsilon=0.0)):
            with self.subTest(kind=spec.kind):
                adversarial = attack(summed, self.inputs, self.targets, spec, generator)
                self.assertTrue(torch.equal(adversarial, self.inputs))


class NetworkAttackTests(SimpleTestCase):
    def setUp(self):
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(0)
            supernet = Supernet(4)
        self.view = supernet.view(random_genome(np.random.default_rng(0)))
        dataset = synth_dataset(0, 16, 4)
        self.images, self.labels = dataset.train.images, dataset.train.labels

    def loss(self, images):
        with torch.no_grad():
            return float(F.cross_entropy(self.view(images), self.labels))

    def test_pgd_stays_in_ball(self):
        spec = AttackSpec.pgd(10)
        generator = torch.Generator().manual_seed(1)
        adversarial = pgd(self.view, self.images, self.labels, spec, generator)
        self.assertLessEqual(float((adversarial - self.images).abs().max()), EPSILON + 1e-12)
        self.assertGreaterEqual(float(adversarial.min()), 0.0)
        self.assertLessEqual(float(adversarial.max()), 1.0)

    def test_random_start_is_seeded(self):
        spec = AttackSpec.pgd(2)
        first = pgd(
            self.view, self.images, self.labels, spec, torch.Generator().manual_seed(4)
        )
        second = pgd(
            self.view, self.images, self.labels, spec, torch.Generator().manual_seed(4)
        )
        self.assertTrue(torch.equal(first, second))

    def test_attacks_raise_the_loss(self):
        clean = self.loss(self.images)
        adversarial_fgsm = fgsm(self.view, self.images, self.labels, AttackSpec.fgsm())
        adversarial_pgd = pgd(
            self.view, self.images, self.labels, AttackSpec.pgd(7, random_start=False)
        )
        self.assertGreater(self.loss(adversarial_fgsm), clean)
        self.assertGreater(self.loss(adversarial_pgd), clean)

    def test_disconnected_path(self):
        view = self.view.supernet.view(validate([0] * 56))
        self.view.supernet.requires_grad_(False)
        adversarial = fgsm(view, self.images, self.labels, AttackSpec.fgsm())
        self.assertTrue(torch.equal(adversarial, self.images))


def flat(images):
    return images.flatten(1)


class RandomStartTests(SimpleTestCase):
    def test_uniform_in_ball(self):
        inputs = torch.full((64, 1, 8, 8), 0.5, dtype=torch.float64)

        def blind(images):
            # Constant logits: every step has a zero gradient and leaves the start in place.
            return torch.zeros(len(images), 4, dtype=images.dtype) + 0 * flat(images)[:, :1]

        spec = AttackSpec.pgd(1, epsilon=EPSILON)
        generator = torch.Generator().manual_seed(3)
        labels = torch.zeros(64, dtype=torch.long)
        offsets = pgd(blind, inputs, labels, spec, generator) - inputs
        samples = (offsets / EPSILON).flatten().numpy()
        self.assertLessEqual(float(np.abs(samples).max()), 1 + 1e-9)
        self.assertGreater(stats.kstest(samples, "uniform", args=(-1, 2)).pvalue, 0.01)


class FeasibilityTests(SimpleTestCase):
    def test_random_models_and_inputs(self):
        generator = torch.Generator().manual_seed(0)
        rng = np.random.default_rng(0)
        pairs = 0
        for _ in range(50):
            linear = torch.nn.Linear(64, 4).double()
            with torch.no_grad():
                linear.weight.normal_(generator=generator)
                linear.bias.normal_(generator=generator)
            images = torch.rand((20, 1, 8, 8), generator=generator, dtype=torch.float64)
            labels = torch.randint(0, 4, (20,), generator=generator)
            epsilon = float(rng.uniform(0, 0.1))
            model = torch.nn.Sequential(torch.nn.Flatten(), linear)
            for spec in (
                AttackSpec.fgsm(epsilon),
                AttackSpec.pgd(3, epsilon=epsilon, step_size=epsilon / 2),
            ):
                adversarial = attack(model, images, labels, spec, generator)
                self.assertLessEqual(
                    float((adversarial - images).abs().max()), epsilon + 1e-12
                )
                self.assertGreaterEqual(float(adversarial.min()), 0.0)
                self.assertLessEqual(float(adversarial.max()), 1.0)
            pairs += len(images)
        self.assertEqual(pairs, 1000)
