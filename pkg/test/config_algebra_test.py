# pylint: disable=missing-docstring, invalid-name
import math
import unittest

import numpy as np
from scipy.special import erfcx

from frakpoisson.mittag_leffler import DomainError, MLParams, ml_eval
from frakpoisson.stable_mixture import RngStream
from frakpoisson.config_algebra import (
    BaseOperator,
    CapError,
    ConfigFunction,
    DiscreteBaseSpace,
    DiscreteConfiguration,
    DiscreteField,
    SupportError,
    annihilation_alpha,
    annihilation_lp,
    coherent_function,
    coherent_gram,
    coherent_state,
    compositions,
    correlation_identity_check,
    creation_alpha,
    creation_lp,
    exact_coherent_gram,
    frac_coherent,
    frac_lp_integral,
    frac_lp_weight,
    i_alpha,
    i_alpha_inv,
    inner_product,
    k_indicator,
    k_transform,
    level_factors,
    lp_integral,
    lp_weight,
    lp_weight_bruteforce,
    norm_identity_check,
    sample_multiplicities,
    second_quantization_alpha,
    second_quantization_lp,
    second_quantization_lp_operator,
    totality_witness,
)


class CompositionsTest(unittest.TestCase):
    def test_counts(self):
        self.assertEqual(math.comb(6, 2), len(list(compositions(4, 3))))
        self.assertTrue(all(sum(c) == 4 for c in compositions(4, 3)))
        self.assertEqual([(0,)], list(compositions(0, 1)))


class DiscreteConfigurationTest(unittest.TestCase):
    def test_parse_label(self):
        eta = DiscreteConfiguration.parse('1:2,3:1', 3)
        self.assertEqual((2, 0, 1), eta.multiplicities)
        self.assertEqual('1:2,3:1', eta.label)
        self.assertEqual(3, eta.size)
        self.assertEqual((0, 0, 2), eta.indices)
        self.assertEqual('{1:2,3:1}', repr(eta))

    def test_empty(self):
        eta = DiscreteConfiguration.parse('', 2)
        self.assertEqual(DiscreteConfiguration.empty(2), eta)
        self.assertEqual('', eta.label)
        self.assertEqual(0, eta.size)

    def test_bad_label(self):
        for label in ('0:1', '4:1', 'x', '1:-1'):
            with self.assertRaises(DomainError):
                DiscreteConfiguration.parse(label, 3)

    def test_add_remove(self):
        eta = DiscreteConfiguration.from_indices([0, 0, 2], 3)
        self.assertEqual(DiscreteConfiguration([2, 1, 1]), eta.add(1))
        self.assertEqual(DiscreteConfiguration([1, 0, 1]), eta.remove(0))
        with self.assertRaises(SupportError):
            eta.remove(1)

    def test_order(self):
        a = DiscreteConfiguration([0, 1])
        b = DiscreteConfiguration([2, 0])
        c = DiscreteConfiguration([1, 0])
        self.assertEqual([c, a, b], sorted([b, a, c]))

    def test_sub_configurations(self):
        eta = DiscreteConfiguration([2, 1])
        subs = dict(eta.sub_configurations())
        self.assertEqual(6, len(subs))
        self.assertEqual(2, subs[DiscreteConfiguration([1, 0])])
        self.assertEqual(2 ** 3, sum(subs.values()))


class WeightTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([2.0, 0.5, 1.5])

    def test_lp_weight(self):
        self.assertEqual(1.0, lp_weight(self.base, self.base.empty()))
        self.assertEqual(2.0, lp_weight(self.base, self.base.point(0)))
        self.assertEqual(2.0, lp_weight(self.base, self.base.parse('1:2')))

    def test_bruteforce(self):
        for eta in self.base.configurations(4):
            np.testing.assert_allclose(lp_weight(self.base, eta),
                                       lp_weight_bruteforce(self.base, eta), rtol=1e-13)

    def test_frac_weight(self):
        eta = self.base.parse('1:1,2:1')
        np.testing.assert_allclose(2 * lp_weight(self.base, eta),
                                   frac_lp_weight(MLParams(0.5), self.base, eta), rtol=1e-14)
        self.assertEqual(1.0, frac_lp_weight(MLParams(0.3), self.base, self.base.empty()))
        for eta in self.base.configurations(4):
            np.testing.assert_allclose(lp_weight(self.base, eta),
                                       frac_lp_weight(MLParams(1), self.base, eta), rtol=1e-14)

    def test_level_factors_read_only(self):
        factors = level_factors(0.5, 4)
        np.testing.assert_allclose([1, 2 / math.sqrt(math.pi), 2, 12 / math.sqrt(math.pi) / 1.5,
                                    12], factors, rtol=1e-13)
        with self.assertRaises(ValueError):
            factors[0] = 2.0

    def test_base_space(self):
        base = DiscreteBaseSpace.load(masses='1,2,3')
        self.assertEqual(3, base.size)
        self.assertEqual(6.0, base.total_mass)
        with self.assertRaises(DomainError):
            DiscreteBaseSpace([1.0, -1.0])
        with self.assertRaises(DomainError):
            DiscreteBaseSpace(np.ones(13))


class ConfigFunctionTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8])

    def test_zero_not_stored(self):
        G = ConfigFunction(self.base, n_cap=2)
        G[self.base.point(1)] = 0.0
        self.assertEqual(0, len(G))
        self.assertEqual(-1, G.support_level)

    def test_support(self):
        G = ConfigFunction(self.base, n_cap=2)
        with self.assertRaises(SupportError):
            G[self.base.parse('1:3')] = 1.0
        with self.assertRaises(DomainError):
            G[DiscreteConfiguration([1])] = 1.0

    def test_json(self):
        G = ConfigFunction(self.base, {self.base.empty(): 1.5, self.base.parse('1:2,3:1'): 2 - 1j},
                           n_cap=3)
        text = G.to_json()
        self.assertEqual('{"": [1.5, 0.0], "1:2,3:1": [2.0, -1.0]}', text)
        H = ConfigFunction.from_json(text, self.base, n_cap=3)
        self.assertEqual(0, G.max_abs_diff(H))

    def test_arithmetic(self):
        G = ConfigFunction.random(self.base, RngStream(1), 2)
        self.assertEqual(0, (G - G).max_abs())
        np.testing.assert_allclose(2 * G.max_abs(), (G + G).max_abs())
        self.assertEqual(0, (2 * G).max_abs_diff(G + G))


class KTransformTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8])
        cls.gammas = cls.base.configurations(4)

    def test_empty_indicator(self):
        G = ConfigFunction.indicator(self.base, [self.base.empty()])
        self.assertTrue(all(k_transform(G, gamma) == 1 for gamma in self.gammas))

    def test_point_indicator(self):
        G = ConfigFunction.indicator(self.base, [self.base.point(1)])
        for gamma in self.gammas:
            self.assertEqual(gamma.multiplicities[1], k_transform(G, gamma))

    def test_coherent_state(self):
        f = DiscreteField([0.3, -0.7 + 0.2j, 1.1])
        G = coherent_function(self.base, f, 4)
        for gamma in self.gammas:
            expected = np.prod([(1 + f(i)) ** k for i, k in enumerate(gamma.multiplicities)])
            np.testing.assert_allclose(expected, k_transform(G, gamma), rtol=1e-13)

    def test_indicator_vectorized(self):
        A = [self.base.point(0), self.base.parse('1:1,2:1'), self.base.parse('3:2')]
        G = ConfigFunction.indicator(self.base, A)
        rows = np.array([gamma.multiplicities for gamma in self.gammas])
        expected = [k_transform(G, gamma).real for gamma in self.gammas]
        np.testing.assert_allclose(expected, k_indicator(A, rows))

    def test_too_large(self):
        G = ConfigFunction.indicator(self.base, [self.base.empty()])
        with self.assertRaises(SupportError):
            k_transform(G, self.base.parse('1:9'))


class IntegralTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8])

    def test_empty_indicator(self):
        G = ConfigFunction.indicator(self.base, [self.base.empty()])
        self.assertEqual(1.0, lp_integral(self.base, G, 0))
        self.assertEqual(1.0, frac_lp_integral(MLParams(0.4), self.base, G, 3))

    def test_exponential(self):
        f = DiscreteField([0.2, -0.1, 0.3])
        G = coherent_function(self.base, f, 8)
        expected = math.exp(0.2 * 0.5 - 0.1 * 1.0 + 0.3 * 0.8)
        np.testing.assert_allclose(expected, lp_integral(self.base, G, 8), rtol=1e-7)
        np.testing.assert_allclose(expected, frac_lp_integral(MLParams(1), self.base, G, 8),
                                   rtol=1e-7)

    def test_cap(self):
        G = ConfigFunction.indicator(self.base, [self.base.parse('1:3')])
        with self.assertRaises(CapError):
            lp_integral(self.base, G, 2)


class CoherentStateTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8])
        cls.f = DiscreteField([0.3, 1 - 1j, -2.0])

    def test_values(self):
        self.assertEqual(1, coherent_state(self.f, self.base.empty()))
        self.assertEqual(0, coherent_state(DiscreteField(np.zeros(3)), self.base.point(2)))
        np.testing.assert_allclose(0.09 * (-2.0), coherent_state(self.f, self.base.parse('1:2,3:1')))

    def test_alpha_one(self):
        for eta in self.base.configurations(3):
            np.testing.assert_allclose(coherent_state(self.f, eta),
                                       frac_coherent(MLParams(1), self.f, eta), rtol=1e-14)

    def test_i_alpha_realizes_coherent_state(self):
        ml = MLParams(0.6)
        frac = coherent_function(self.base, self.f, 4, ml)
        plain = coherent_function(self.base, self.f, 4)
        self.assertLess(i_alpha(ml, frac).max_abs_diff(plain), 1e-12)
        self.assertLess(i_alpha_inv(ml, i_alpha(ml, frac)).max_abs_diff(frac), 1e-12)

    def test_i_alpha_identity_at_one(self):
        G = ConfigFunction.random(self.base, RngStream(3), 3)
        self.assertLess(i_alpha(MLParams(1), G).max_abs_diff(G), 1e-15)

    def test_unitary(self):
        rng = RngStream(4)
        for alpha in (0.3, 0.7):
            ml = MLParams(alpha)
            for _ in range(10):
                G = ConfigFunction.random(self.base, rng, 4)
                H = ConfigFunction.random(self.base, rng, 4)
                np.testing.assert_allclose(inner_product(self.base, G, H, ml),
                                           inner_product(self.base, i_alpha(ml, G),
                                                         i_alpha(ml, H)), rtol=1e-12)

    def test_gram(self):
        rng = RngStream(5)
        fields = [DiscreteField.random(self.base, rng, scale=0.25) for _ in range(5)]
        ml = MLParams(0.5)
        np.testing.assert_allclose(exact_coherent_gram(self.base, fields),
                                   coherent_gram(self.base, fields, 8, ml), rtol=1e-3)
        self.assertGreater(totality_witness(ml, self.base, fields, 8), 1e-12)


class LadderOperatorTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8, 0.3, 0.6])
        cls.empty = ConfigFunction.indicator(cls.base, [cls.base.empty()])

    def test_annihilate_vacuum(self):
        phi = DiscreteField.random(self.base, RngStream(1))
        self.assertEqual(0, len(annihilation_lp(self.base, phi, self.empty)))

    def test_create_from_vacuum(self):
        phi = DiscreteField.random(self.base, RngStream(2))
        G = creation_lp(self.base, phi, self.empty)
        for i in range(self.base.size):
            self.assertEqual(phi(i), G[self.base.point(i)])

    def test_ccr(self):
        rng = RngStream(3)
        for _ in range(3):
            G = ConfigFunction.random(self.base, rng, 3)
            phi = DiscreteField.random(self.base, rng)
            psi = DiscreteField.random(self.base, rng)
            commutator = annihilation_lp(self.base, phi, creation_lp(self.base, psi, G)) - \
                creation_lp(self.base, psi, annihilation_lp(self.base, phi, G))
            self.assertLess(commutator.max_abs_diff(self.base.pairing(psi, phi) * G), 1e-10)

    def test_creation_beyond_cap(self):
        G = ConfigFunction.indicator(self.base, [self.base.parse('1:2')])
        with self.assertRaises(SupportError):
            creation_lp(self.base, DiscreteField(np.ones(5)), G, n_max=2)

    def test_formula_matches_conjugation(self):
        rng = RngStream(4)
        for alpha in (0.3, 0.8):
            ml = MLParams(alpha)
            for _ in range(10):
                G = ConfigFunction.random(self.base, rng, 3)
                phi = DiscreteField.random(self.base, rng)
                for op in (annihilation_alpha, creation_alpha):
                    self.assertLess(op(ml, self.base, phi, G).max_abs_diff(
                        op(ml, self.base, phi, G, route='conjugation')), 1e-12)

    def test_alpha_one_reduces(self):
        G = ConfigFunction.random(self.base, RngStream(5), 3)
        phi = DiscreteField.random(self.base, RngStream(6))
        ml = MLParams(1)
        self.assertLess(annihilation_alpha(ml, self.base, phi, G).max_abs_diff(
            annihilation_lp(self.base, phi, G)), 1e-14)
        self.assertLess(creation_alpha(ml, self.base, phi, G).max_abs_diff(
            creation_lp(self.base, phi, G)), 1e-14)

    def test_adjoint(self):
        rng = RngStream(7)
        ml = MLParams(0.6)
        base = DiscreteBaseSpace([0.5, 1.0, 0.8])
        for _ in range(10):
            G = ConfigFunction.random(base, rng, 3)
            H = ConfigFunction.random(base, rng, 4)
            phi = DiscreteField.random(base, rng)
            np.testing.assert_allclose(
                inner_product(base, creation_alpha(ml, base, phi, G), H, ml),
                inner_product(base, G, annihilation_alpha(ml, base, phi.conj(), H), ml),
                rtol=1e-10)


class SecondQuantizationTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8, 0.3])
        cls.f = DiscreteField([0.3, -0.5 + 0.2j, 0.7, 1.1j])
        cls.etas = cls.base.configurations(4)

    def test_zero_operator(self):
        A = BaseOperator.zero(4)
        self.assertTrue(all(second_quantization_lp(self.base, A, self.f, eta) == 0
                            for eta in self.etas))

    def test_number_operator(self):
        A = BaseOperator.identity(4)
        for eta in self.etas:
            np.testing.assert_allclose(eta.size * coherent_state(self.f, eta),
                                       second_quantization_lp(self.base, A, self.f, eta),
                                       atol=1e-14)

    def test_operator_on_coherent_state(self):
        A = BaseOperator.random(4, RngStream(1))
        image = second_quantization_lp_operator(self.base, A, coherent_function(self.base, self.f, 4))
        for eta in self.etas:
            np.testing.assert_allclose(second_quantization_lp(self.base, A, self.f, eta),
                                       image[eta], rtol=1e-12, atol=1e-14)

    def test_formula_matches_conjugation(self):
        rng = RngStream(2)
        for alpha in (0.4, 0.9):
            ml = MLParams(alpha)
            for _ in range(10):
                A = BaseOperator.random(4, rng)
                f = DiscreteField.random(self.base, rng, scale=0.5)
                eta = self.etas[int(rng.random() * len(self.etas))]
                np.testing.assert_allclose(
                    second_quantization_alpha(ml, self.base, A, f, eta),
                    second_quantization_alpha(ml, self.base, A, f, eta, route='conjugation'),
                    rtol=1e-12, atol=1e-14)


class CorrelationIdentityTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8, 0.3])

    def test_empty_set(self):
        report = correlation_identity_check(MLParams(0.5), self.base, [self.base.empty()], 1000,
                                            RngStream(1))
        self.assertEqual(1.0, report.exact)
        self.assertEqual(1.0, report.estimate)
        self.assertTrue(report.passed)

    def test_single_point_poisson(self):
        report = correlation_identity_check(MLParams(1), self.base, [self.base.point(0)],
                                            200_000, RngStream(2))
        np.testing.assert_allclose(0.5, report.exact)
        self.assertTrue(report.passed, report.name)

    def test_pair(self):
        A = [self.base.parse('1:1,2:1')]
        report = correlation_identity_check(MLParams(0.5), self.base, A, 200_000, RngStream(3))
        np.testing.assert_allclose(2 * 0.5 * 1.0, report.exact, rtol=1e-13)
        self.assertTrue(report.passed, report.name)

    def test_multiplicities(self):
        rows = sample_multiplicities(MLParams(0.7), self.base, RngStream(4), 1000)
        self.assertEqual((1000, 4), rows.shape)
        self.assertTrue(np.all(rows >= 0))


class NormIdentityTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.base = DiscreteBaseSpace([0.5, 1.0, 0.8])

    def test_zero_field(self):
        result = norm_identity_check(MLParams(0.5), self.base, DiscreteField(np.zeros(3)))
        self.assertEqual(1.0, result.lhs)
        self.assertEqual(1.0, result.rhs)

    def test_exponential(self):
        f = DiscreteField([0.5, 0.3j, -0.4])
        result = norm_identity_check(MLParams(1), self.base, f)
        s = self.base.norm_p(f, 2)
        np.testing.assert_allclose(math.exp(s), result.lhs, rtol=1e-10)
        np.testing.assert_allclose(math.exp(s), result.rhs, rtol=1e-13)

    def test_half(self):
        f = DiscreteField(np.ones(3) / math.sqrt(self.base.total_mass))
        result = norm_identity_check(MLParams(0.5), self.base, f)
        np.testing.assert_allclose(erfcx(-1.0), result.rhs, rtol=1e-13)
        self.assertLess(result.difference, 1e-9)

    def test_random_fields(self):
        rng = RngStream(5)
        for alpha in (0.4, 0.7):
            for _ in range(3):
                f = DiscreteField.random(self.base, rng, scale=0.4)
                result = norm_identity_check(MLParams(alpha), self.base, f, p=2)
                self.assertLess(result.difference, 1e-9)
                self.assertLessEqual(result.tail, 1e-10)
                np.testing.assert_allclose(ml_eval(MLParams(alpha), self.base.norm_p(f, 2)),
                                           result.rhs)

    def test_p_one(self):
        f = DiscreteField([0.5, 0.2, 0.1])
        result = norm_identity_check(MLParams(0.6), self.base, f, p=1)
        self.assertLess(result.difference, 1e-9)

    def test_cap(self):
        f = DiscreteField(np.ones(3) * 2)
        with self.assertRaises(CapError):
            norm_identity_check(MLParams(0.5), self.base, f, level_cap=5)
