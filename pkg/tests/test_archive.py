import numpy as np
from django.test import SimpleTestCase

from robustnas.archive import Archive, EvaluationRecord, secondary_screening
from robustnas.evo import dominates
from robustnas.exceptions import EmptyInput
from robustnas.genome import validate


def genome(index):
    return validate([int(digit) for digit in np.base_repr(index, 4).zfill(56)])


def low_key(record):
    return (record.f1l, record.f2l)


class ArchiveTests(SimpleTestCase):
    def setUp(self):
        self.archive = Archive(low_key)

    def test_insert_non_dominated(self):
        self.assertTrue(self.archive.insert(EvaluationRecord(genome(1), f1l=0.2, f2l=0.8)))
        self.assertTrue(self.archive.insert(EvaluationRecord(genome(2), f1l=0.8, f2l=0.2)))
        self.assertEqual(len(self.archive), 2)

    def test_rejects_dominated(self):
        self.archive.insert(EvaluationRecord(genome(1), f1l=0.2, f2l=0.2))
        self.assertFalse(self.archive.insert(EvaluationRecord(genome(2), f1l=0.3, f2l=0.3)))
        self.assertNotIn(genome(2), self.archive)

    def test_removes_dominated_members(self):
        self.archive.update(
            [
                EvaluationRecord(genome(1), f1l=0.5, f2l=0.5),
                EvaluationRecord(genome(2), f1l=0.1, f2l=0.9),
            ]
        )
        self.assertTrue(self.archive.insert(EvaluationRecord(genome(3), f1l=0.4, f2l=0.4)))
        self.assertEqual(
            [record.genome for record in self.archive], [genome(2), genome(3)]
        )

    def test_duplicates(self):
        self.archive.insert(EvaluationRecord(genome(1), f1l=0.5, f2l=0.5))
        self.assertFalse(self.archive.insert(EvaluationRecord(genome(1), f1l=0.1, f2l=0.1)))
        self.assertEqual(self.archive.records[0].f1l, 0.5)

    def test_equal_objectives_coexist(self):
        admitted = self.archive.update(
            [
                EvaluationRecord(genome(1), f1l=0.5, f2l=0.5),
                EvaluationRecord(genome(2), f1l=0.5, f2l=0.5),
            ]
        )
        self.assertEqual(admitted, 2)

    def test_copies_records(self):
        archive = Archive(lambda record: (record.f1l, record.f2l, record.f3))
        record = EvaluationRecord(genome(1), f1l=0.5, f2l=0.5, f3=0.3)
        archive.insert(record)
        record.f3 = 0.9
        self.assertEqual(archive.records[0].f3, 0.3)
        self.assertEqual(archive.insertion_objectives(), [(0.5, 0.5, 0.3)])

    def test_generation_stamp(self):
        record = EvaluationRecord(genome(1), f1l=0.5, f2l=0.5, generation=2)
        self.archive.update([record], generation=7)
        self.archive.insert(EvaluationRecord(genome(2), f1l=0.1, f2l=0.9, generation=3))
        self.assertEqual([member.generation for member in self.archive], [7, 3])
        self.assertEqual(record.generation, 2)

    def test_mutually_non_dominated(self):
        records = [
            EvaluationRecord(
                genome(index), f1l=(index * 37 % 11) / 11, f2l=(index * 17 % 13) / 13
            )
            for index in range(40)
        ]
        self.archive.update(records)
        objectives = self.archive.insertion_objectives()
        for first in objectives:
            for second in objectives:
                self.assertFalse(dominates(first, second))


class EvaluationRecordTests(SimpleTestCase):
    def test_fidelities(self):
        record = EvaluationRecord(genome(0))
        self.assertFalse(record.has_low)
        self.assertFalse(record.has_high)
        record.set_low((0.1, 0.2))
        record.set_high((0.3, 0.4))
        self.assertEqual((record.low(), record.high()), ((0.1, 0.2), (0.3, 0.4)))
        self.assertIsNotNone(record.high_evaluated_at)

    def test_timestamps_ignored_in_equality(self):
        first, second = EvaluationRecord(genome(0)), EvaluationRecord(genome(0))
        first.set_low((0.1, 0.2))
        second.set_low((0.1, 0.2))
        second.low_evaluated_at = 0.0
        self.assertEqual(first, second)


class SecondaryScreeningTests(SimpleTestCase):
    objectives = {
        genome(1): (0.2, 0.8),
        genome(2): (0.5, 0.5),
        genome(3): (0.6, 0.6),
        genome(4): (0.8, 0.2),
    }

    def evaluate_high(self, candidate):
        self.calls.append(candidate)
        return self.objectives[candidate]

    def setUp(self):
        self.calls = []
        self.records = [
            EvaluationRecord(candidate, f1l=0.1, f2l=0.1) for candidate in self.objectives
        ]

    def test_front(self):
        screened = secondary_screening(self.records, self.evaluate_high)
        self.assertEqual(
            [record.genome for record in screened], [genome(1), genome(2), genome(4)]
        )
        self.assertEqual(screened[0].high(), (0.2, 0.8))
        self.assertFalse(self.records[0].has_high)

    def test_workers(self):
        self.assertEqual(
            secondary_screening(self.records, self.evaluate_high, workers=3),
            secondary_screening(self.records, self.evaluate_high, workers=1),
        )

    def test_known_high_objectives_are_reused(self):
        self.records[1].set_high((0.1, 0.1))
        screened = secondary_screening(self.records, self.evaluate_high)
        self.assertEqual([record.genome for record in screened], [genome(2)])
        self.assertNotIn(genome(2), self.calls)

    def test_empty(self):
        with self.assertRaises(EmptyInput):
            secondary_screening([], self.evaluate_high)
