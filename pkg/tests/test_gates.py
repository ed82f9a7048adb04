import numpy as np
from django.test import SimpleTestCase
from scipy.special import expit

from robustnas.constants import Operation
from robustnas.gates import (
    EMBEDDING_SIZE,
    GatesEncoder,
    embed_arch,
    embed_block,
    embedding_hash,
    init_params,
)
from robustnas.genome import decode, edge_slots, random_genome, validate


class InitParamsTests(SimpleTestCase):
    def test_deterministic(self):
        first, second = init_params(3), init_params(3)
        for name in ("operation_embedding", "w_o", "w_x", "input_node_info"):
            self.assertTrue(np.array_equal(getattr(first, name), getattr(second, name)))

    def test_seeds_differ(self):
        self.assertFalse(np.array_equal(init_params(0).w_x, init_params(1).w_x))

    def test_shapes(self):
        params = init_params(0)
        self.assertEqual(params.operation_embedding.shape, (4, 16))
        self.assertEqual(params.w_o.shape, (16, 32))
        self.assertEqual(params.w_x.shape, (32, 32))
        self.assertEqual(params.input_node_info.shape, (2, 32))
        self.assertEqual(params.masks().shape, (4, 32))


class EmbedTests(SimpleTestCase):
    def setUp(self):
        self.params = init_params(11)

    def test_two_incoming_edges(self):
        genes = [0] * 14
        genes[0] = Operation.SKIP_CONNECT  # 0 -> 2
        genes[3] = Operation.RES_SEP_CONV_3X3  # 1 -> 3, o2
        genes[4] = Operation.SEP_CONV_3X3  # 2 -> 3, o1
        dag = decode(validate(genes + [0] * 42)).blocks[0]
        params = self.params

        def mask(operation):
            return expit(params.operation_embedding[operation] @ params.w_o)

        info_0, info_1 = params.input_node_info
        info_2 = mask(Operation.SKIP_CONNECT) * (info_0 @ params.w_x)
        info_3 = mask(Operation.RES_SEP_CONV_3X3) * (info_1 @ params.w_x) + mask(
            Operation.SEP_CONV_3X3
        ) * (info_2 @ params.w_x)
        expected = (info_2 + info_3) / 4
        np.testing.assert_allclose(embed_block(dag, params), expected, rtol=1e-12)

    def test_all_none(self):
        embedding = embed_arch(decode(validate([0] * 56)), self.params)
        self.assertEqual(embedding.shape, (EMBEDDING_SIZE,))
        self.assertFalse(embedding.any())

    def test_first_block_locality(self):
        genes = list(random_genome(np.random.default_rng(0)).genes[:14]) + [0] * 42
        embedding = embed_arch(decode(validate(genes)), self.params)
        self.assertFalse(embedding[32:].any())

    def test_single_flip_changes_embedding(self):
        rng = np.random.default_rng(5)
        slots = edge_slots()
        changed = 0
        for _ in range(100):
            genome = random_genome(rng)
            candidates = [
                index
                for index, gene in enumerate(genome.genes)
                if gene != Operation.NONE and slots[index % 14][0] < 2
            ]
            if not candidates:
                changed += 1
                continue
            index = candidates[int(rng.integers(len(candidates)))]
            other = [
                value for value in (1, 2, 3) if value != genome.genes[index]
            ][int(rng.integers(2))]
            before = embed_arch(decode(genome), self.params)
            after = embed_arch(decode(genome.replace(index, other)), self.params)
            changed += not np.array_equal(before, after)
        self.assertGreaterEqual(changed, 99)


class EncoderTests(SimpleTestCase):
    def test_memoized_and_deterministic(self):
        genome = random_genome(np.random.default_rng(1))
        encoder = GatesEncoder(7)
        first = encoder.embed(genome)
        self.assertIs(encoder.embed(genome), first)
        self.assertFalse(first.flags.writeable)
        np.testing.assert_array_equal(GatesEncoder(7).embed(genome), first)

    def test_embed_many(self):
        encoder = GatesEncoder(0)
        self.assertEqual(encoder.embed_many([]).shape, (0, EMBEDDING_SIZE))
        genomes = [random_genome(np.random.default_rng(seed)) for seed in range(3)]
        self.assertEqual(encoder.embed_many(genomes).shape, (3, EMBEDDING_SIZE))

    def test_hash(self):
        embedding = GatesEncoder(0).embed(validate([2] * 56))
        self.assertEqual(embedding_hash(embedding), embedding_hash(embedding.copy()))
        self.assertEqual(len(embedding_hash(embedding)), 40)
