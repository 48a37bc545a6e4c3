import numpy as np
import pytest

from nystrom_krr.diagnostics import (
    check_concentration,
    check_norm_equivalence,
    check_projection_bound,
    check_smoothness_perturbation,
    reports_to_csv,
)
from nystrom_krr.kernels import DecaySpec
from nystrom_krr.spectral import IndexFunction, analytic_profile, lambda0
from nystrom_krr.synthetic import NoiseSpec, TargetSpec

DECAY = DecaySpec(0.5)


def test_projection_bound_single_inducing_point():
    # m = 1 with lambda >= mu_1 / 3: the residual norm is at most mu_1, so
    # the 3-lambda threshold cannot be crossed
    report = check_projection_bound(
        DECAY, truncation=16, n=50, m=1, lam=0.5, delta=0.1, trials=20, seed=0
    )
    assert report.violation_rate == 0.0
    assert report.warnings  # m = 1 is far below the rule size


def test_projection_bound_rule_sized():
    decay, truncation, n = DECAY, 64, 512
    lam = lambda0(analytic_profile(decay, truncation), n)
    from nystrom_krr.nystrom import SizeRuleParams, subsample_size

    m = subsample_size(n, lam, SizeRuleParams(), profile=analytic_profile(decay, truncation))
    report = check_projection_bound(decay, truncation, n, m, lam, 0.1, trials=60, seed=1)
    assert not report.warnings
    assert report.violation_rate <= 0.1 + 2.0 * np.sqrt(0.1 / 60)


def test_projection_bound_full_rank_subsample():
    # m = n = 40 distinct points spanning a 16-dim basis: the projector is
    # (numerically) the identity on the span and the residual vanishes
    report = check_projection_bound(
        DECAY, truncation=16, n=40, m=40, lam=0.3, delta=0.1, trials=10, seed=2
    )
    assert report.violation_rate == 0.0
    assert report.observed_max_ratio < 1e-6


def test_norm_equivalence_population_limit():
    report = check_norm_equivalence(DECAY, truncation=16, n=100_000, lam=0.01, delta=0.1, trials=5, seed=3)
    assert report.violation_rate == 0.0
    # norm should sit near 1 in the large-n limit
    assert report.observed_max_ratio < 0.75


def test_norm_equivalence_rule_scale_settings():
    decay, truncation, n = DECAY, 256, 2048
    lam = lambda0(analytic_profile(decay, truncation), n)
    report = check_norm_equivalence(decay, truncation, n, lam, 0.1, trials=100, seed=21)
    assert report.violation_rate <= 0.1 + 2.0 * np.sqrt(0.1 / 100)


def test_norm_equivalence_shift_dominance():
    report = check_norm_equivalence(DECAY, truncation=32, n=50, lam=50.0, delta=0.1, trials=5, seed=4)
    assert report.violation_rate == 0.0


def test_concentration_operator_shrinks_with_n():
    decay, truncation = DECAY, 8
    lam = 0.05
    meds = []
    for n in (1_000, 10_000, 100_000):
        report = check_concentration(decay, truncation, n, lam, trials=30, seed=5, which="operator")
        meds.append(report.quantile_ratio)
    # the rate factor already carries 1/sqrt(n), so the normalized quantile
    # should be roughly flat; the raw quantiles shrink like 1/sqrt(n)
    assert max(meds) / min(meds) < 3.0


def test_concentration_quantile_stable_across_lambda():
    from nystrom_krr.spectral import analytic_profile, lambda0

    truncation, n = 16, 2000
    lam0 = lambda0(analytic_profile(DECAY, truncation), n)
    ratios = []
    for lam in (lam0 / 4.0, lam0, 4.0 * lam0):
        report = check_concentration(DECAY, truncation, n, lam, trials=40, seed=12, which="operator")
        ratios.append(report.quantile_ratio)
    assert max(ratios) / min(ratios) < 3.0


def test_concentration_vector_with_target_and_noise():
    from nystrom_krr.spectral import IndexFunction as IF
    from nystrom_krr.synthetic import make_target

    target = make_target(DECAY, 16, IF.holder(0.25), seed=2)
    report = check_concentration(
        DECAY,
        16,
        n=500,
        lam=0.05,
        trials=20,
        seed=13,
        which="vector",
        target=target,
        noise=NoiseSpec.gaussian(0.2),
    )
    assert report.quantile_ratio is not None and report.quantile_ratio > 0.0
    assert np.isfinite(report.observed_max_ratio)


def test_concentration_vector_zero_target_noiseless():
    truncation = 8
    zero_target = TargetSpec(
        phi=IndexFunction.holder(0.5),
        coeff_seed=0,
        profile="sphere",
        v_coefficients=np.zeros(truncation),
        f_coefficients=np.zeros(truncation),
    )
    report = check_concentration(
        DECAY,
        truncation,
        n=200,
        lam=0.1,
        trials=10,
        seed=6,
        which="vector",
        target=zero_target,
        noise=NoiseSpec.uniform_bounded(0.0),
    )
    assert report.observed_max_ratio == 0.0


def test_concentration_validation():
    with pytest.raises(ValueError):
        check_concentration(DECAY, 8, 100, 0.1, trials=5, seed=0, which="both")
    with pytest.raises(ValueError):
        check_concentration(DECAY, 8, 100, 0.1, trials=5, seed=0, which="vector")


def test_smoothness_perturbation_identity_projector():
    # n = m with many distinct points spanning the 8-dim basis: P = I and the
    # operator difference vanishes
    report = check_smoothness_perturbation(
        DECAY, truncation=8, n=30, m=30, lam=0.1, phi=IndexFunction.holder(0.5), trials=8, seed=7
    )
    assert report.observed_max_ratio < 1e-6


def test_smoothness_perturbation_rule_sized_finite():
    decay, truncation, n = DECAY, 32, 256
    lam = lambda0(analytic_profile(decay, truncation), n)
    from nystrom_krr.nystrom import SizeRuleParams, subsample_size

    m = subsample_size(n, lam, SizeRuleParams(), profile=analytic_profile(decay, truncation))
    report = check_smoothness_perturbation(
        decay, truncation, n, m, lam, IndexFunction.holder(0.5), trials=30, seed=8
    )
    assert np.isfinite(report.quantile_ratio)
    assert report.quantile_ratio > 0.0


def test_smoothness_perturbation_rejects_log_type():
    with pytest.raises(NotImplementedError):
        check_smoothness_perturbation(
            DECAY, 8, 30, 10, 0.1, IndexFunction.log_type(0.5), trials=2, seed=0
        )


def test_reports_deterministic_and_csv(tmp_path):
    kwargs = dict(decay=DECAY, truncation=16, n=128, m=20, lam=0.05, delta=0.1, trials=10, seed=9)
    a = check_projection_bound(**kwargs)
    b = check_projection_bound(**kwargs)
    assert a.violation_rate == b.violation_rate
    assert a.observed_max_ratio == b.observed_max_ratio

    path = tmp_path / "reports.csv"
    reports_to_csv([a], path)
    text = path.read_text()
    assert "np.float" not in text  # plain scalars only
    lines = text.strip().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("bound_name,")
    assert lines[1].startswith("projection,128,20,")
