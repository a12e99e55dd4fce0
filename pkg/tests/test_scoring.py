import numpy as np
import pytest

from acuscore.errors import InvalidConfig
from acuscore.scoring import (
    DepthBounds,
    ScoringConfig,
    insertion_theta_max,
    method_weight,
    score_acupressure,
    score_deep,
    score_insertion_angle,
    score_lift_thrust,
    score_moxi_distance,
    score_moxibustion,
    score_shallow,
    score_twist,
)

CFG = ScoringConfig()
C = CFG.c


# --- independent oracle: each piecewise definition re-typed with numpy ---------

def oracle_acupressure(d, c, r_min, r_max):
    d = np.asarray(d, float)
    return np.where(d < r_min, c,
                    np.where(d < r_max, c * (d - r_max) ** 2 / (r_min - r_max) ** 2, 0.0))


def oracle_angle(t, c, t_min, t_max):
    t = np.asarray(t, float)
    return np.where(t < t_min, c,
                    np.where(t < t_max, c * (t - t_max) ** 2 / (t_min - t_max) ** 2, 0.0))


def oracle_deep(d, c, b: DepthBounds):
    d = np.asarray(d, float)
    return np.select(
        [d < b.lower, d < b.min, d < b.max, d < b.upper],
        [0.0,
         c * (d - b.lower) / (b.min - b.lower),
         c,
         c * (d - b.upper) ** 2 / (b.max - b.upper) ** 2],
        default=0.0)


def oracle_shallow(d, c, b: DepthBounds):
    d = np.asarray(d, float)
    return np.select(
        [d < b.lower, d < b.min, d < b.max, d < b.upper],
        [0.0, c * d / b.min, c, c * (d - b.upper) / (b.max - b.upper)],
        default=0.0)


def oracle_moxi(d, c, b: DepthBounds):
    d = np.asarray(d, float)
    return np.select(
        [d < b.lower, d < b.min, d < b.max, d < b.upper],
        [0.0,
         c * (d - b.lower) ** 2 / (b.min - b.lower) ** 2,
         c,
         c * (d - b.upper) / (b.max - b.upper)],
        default=0.0)


@pytest.mark.parametrize("scorer,oracle,upper", [
    (lambda d: score_acupressure(d, CFG, "hand"),
     lambda d: oracle_acupressure(d, C, *CFG.acupressure["hand"]), 2.0),
    (lambda d: score_insertion_angle(d, CFG),
     lambda d: oracle_angle(d, C, CFG.theta_min, CFG.theta_max), 30.0),
    (lambda d: score_deep(d, CFG), lambda d: oracle_deep(d, C, CFG.deep), 4.5),
    (lambda d: score_shallow(d, CFG), lambda d: oracle_shallow(d, C, CFG.shallow), 3.5),
    (lambda d: score_moxi_distance(d, CFG), lambda d: oracle_moxi(d, C, CFG.moxi), 6.0),
])
def test_dense_tabulation_matches_oracle(scorer, oracle, upper):
    xs = np.arange(0.0, upper, 1e-4)
    expected = oracle(xs)
    got = np.array([scorer(float(x)) for x in xs])
    assert np.max(np.abs(got - expected)) <= 1e-12 * C


# --- worked examples ---------------------------------------------------------

def test_acupressure_examples():
    r_min, r_max = CFG.acupressure["hand"]
    assert score_acupressure(0.0, CFG, "hand") == C
    assert score_acupressure(r_max, CFG, "hand") == 0.0
    mid = (r_min + r_max) / 2.0
    assert score_acupressure(mid, CFG, "hand") == pytest.approx(C / 4.0, abs=1e-12 * C)


def test_acupressure_regions_differ():
    d = 1.0
    assert score_acupressure(d, CFG, "hand") < score_acupressure(d, CFG, "torso")


def test_insertion_angle_examples():
    assert score_insertion_angle(0.0, CFG) == C
    assert score_insertion_angle(CFG.theta_max, CFG) == 0.0
    assert score_insertion_angle(13.75, CFG) == pytest.approx(C / 4.0, abs=1e-12 * C)


def test_theta_max_per_class():
    assert insertion_theta_max("perpendicular") == 22.5
    assert insertion_theta_max("oblique") == 15.0
    assert insertion_theta_max("transverse") == 15.0


def test_deep_examples():
    b = CFG.deep
    assert score_deep(b.min, CFG) == C
    assert score_deep(b.lower, CFG) == 0.0
    assert score_deep((b.lower + b.min) / 2.0, CFG) == pytest.approx(C / 2.0, abs=1e-12 * C)
    assert score_deep((b.max + b.upper) / 2.0, CFG) == pytest.approx(C / 4.0, abs=1e-12 * C)


def test_shallow_examples():
    b = CFG.shallow
    assert score_shallow(b.min, CFG) == C
    assert score_shallow(b.upper, CFG) == 0.0
    assert score_shallow((b.max + b.upper) / 2.0, CFG) == pytest.approx(C / 2.0, abs=1e-12 * C)


def test_moxi_distance_defaults_reproduce_published_bounds():
    assert CFG.moxi == DepthBounds(2.0, 2.5, 4.0, 5.0)
    assert score_moxi_distance(3.0, CFG) == C
    assert score_moxi_distance(2.0, CFG) == 0.0
    assert score_moxi_distance(5.0, CFG) == 0.0
    assert score_moxi_distance(2.25, CFG) == pytest.approx(0.25 * C, abs=1e-12 * C)
    assert score_moxi_distance(4.5, CFG) == pytest.approx(0.5 * C, abs=1e-12 * C)


def test_method_weight():
    assert method_weight("reinforce", "reinforce") == 1.0
    assert method_weight("reduce", "reinforce") == 0.6
    assert method_weight("whirling", "mild") == 0.6


def test_lift_thrust_totals():
    matched = score_lift_thrust(CFG.deep.min, CFG.shallow.min, "reinforce", "reinforce", CFG)
    assert matched.total == C
    mismatched = score_lift_thrust(CFG.deep.min, CFG.shallow.min, "reduce", "reinforce", CFG)
    assert mismatched.total == pytest.approx(0.6 * C, abs=1e-12 * C)
    half = score_lift_thrust(CFG.deep.min, 0.0, "reinforce", "reinforce", CFG)
    assert half.total == pytest.approx(C / 2.0, abs=1e-12 * C)
    assert half.breakdown["deep"] == C and half.breakdown["shallow"] == 0.0


def test_twist_totals():
    assert score_twist(0, "reinforce", "reinforce", CFG).total == C
    assert score_twist(0, "reduce", "reinforce", CFG).total == pytest.approx(0.6 * C)
    assert score_twist(2, "reinforce", "reinforce", CFG).total == 0.0
    assert score_twist(-1, "reduce", "reduce", CFG).total == 0.0


def test_moxibustion_totals():
    assert score_moxibustion(3.0, "mild", "mild", CFG).total == C
    assert score_moxibustion(3.0, "whirling", "mild", CFG).total == pytest.approx(0.6 * C)
    assert score_moxibustion(5.0, "mild", "mild", CFG).total == 0.0


# --- random-config property suite ------------------------------------------------


def random_config(rng: np.random.Generator) -> ScoringConfig:
    c = float(rng.uniform(1.0, 1000.0))
    knots = np.sort(rng.uniform(0.05, 6.0, size=6))
    eps = 1e-3
    knots += np.arange(6) * eps  # enforce strict separation
    s_lower, s_min, s_max, d_min, d_max, d_upper = (float(k) for k in knots)
    shallow = DepthBounds(s_lower, s_min, s_max, d_max)
    deep = DepthBounds(s_min, d_min, d_max, d_upper)
    m = np.sort(rng.uniform(0.5, 8.0, size=4) + np.arange(4) * eps)
    t = np.sort(rng.uniform(0.5, 40.0, size=2) + np.arange(2) * eps)
    r = np.sort(rng.uniform(0.05, 3.0, size=2) + np.arange(2) * eps)
    return ScoringConfig(
        c=c,
        acupressure={"hand": (float(r[0]), float(r[1]))},
        theta_min=float(t[0]), theta_max=float(t[1]),
        deep=deep, shallow=shallow,
        moxi=DepthBounds(*(float(x) for x in m)),
        mismatch_weight=float(rng.uniform(0.01, 0.99)),
    )


def _scorers(cfg):
    return [
        (lambda d: score_acupressure(d, cfg, "hand"),
         [0.0] + list(cfg.acupressure["hand"]), (0.0, cfg.acupressure["hand"][0]), True),
        (lambda d: score_insertion_angle(d, cfg),
         [0.0, cfg.theta_min, cfg.theta_max], (0.0, cfg.theta_min), True),
        (lambda d: score_deep(d, cfg),
         [cfg.deep.lower, cfg.deep.min, cfg.deep.max, cfg.deep.upper],
         (cfg.deep.min, cfg.deep.max), False),
        (lambda d: score_moxi_distance(d, cfg),
         [cfg.moxi.lower, cfg.moxi.min, cfg.moxi.max, cfg.moxi.upper],
         (cfg.moxi.min, cfg.moxi.max), False),
        # shallow: knots above the documented lower-bound jump only
        (lambda d: score_shallow(d, cfg),
         [cfg.shallow.min, cfg.shallow.max, cfg.shallow.upper],
         (cfg.shallow.min, cfg.shallow.max), False),
    ]


def test_random_config_bounds_continuity_full_score():
    rng = np.random.default_rng(2024)
    h = 1e-9
    for _ in range(400):
        cfg = random_config(rng)
        for scorer, knots, full, _ in _scorers(cfg):
            for k in knots:
                left = scorer(max(k - h, 0.0))
                right = scorer(k)
                assert abs(left - right) <= 1e-6 * cfg.c + 1e-9, f"jump at knot {k}"
            lo, hi = full
            for x in np.linspace(lo, hi - 1e-9, 7):
                assert scorer(float(x)) == cfg.c
            for x in rng.uniform(0.0, knots[-1] * 1.5, size=20):
                v = scorer(float(x))
                assert 0.0 <= v <= cfg.c + 1e-12


def test_monotonicity():
    rng = np.random.default_rng(7)
    for _ in range(50):
        cfg = random_config(rng)
        xs = np.sort(rng.uniform(0, cfg.acupressure["hand"][1] * 1.5, size=40))
        vals = [score_acupressure(float(x), cfg, "hand") for x in xs]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        xs = np.sort(rng.uniform(0, cfg.theta_max * 1.5, size=40))
        vals = [score_insertion_angle(float(x), cfg) for x in xs]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        for scorer, b in ((score_deep, cfg.deep), (score_moxi_distance, cfg.moxi)):
            left = np.sort(rng.uniform(0, b.min, size=20))
            vals = [scorer(float(x), cfg) for x in left]
            assert all(a <= b2 + 1e-12 for a, b2 in zip(vals, vals[1:]))
            right = np.sort(rng.uniform(b.max, b.upper * 1.2, size=20))
            vals = [scorer(float(x), cfg) for x in right]
            assert all(a >= b2 - 1e-12 for a, b2 in zip(vals, vals[1:]))


def test_weight_factorization_exact():
    rng = np.random.default_rng(5)
    for _ in range(200):
        cfg = random_config(rng)
        d_deep = float(rng.uniform(0, cfg.deep.upper * 1.2))
        d_shallow = float(rng.uniform(0, cfg.shallow.upper * 1.2))
        matched = score_lift_thrust(d_deep, d_shallow, "reinforce", "reinforce", cfg)
        mismatched = score_lift_thrust(d_deep, d_shallow, "reinforce", "reduce", cfg)
        assert mismatched.total == matched.total * cfg.mismatch_weight


# --- config validation ----------------------------------------------------------

def test_depth_bounds_must_increase():
    with pytest.raises(InvalidConfig):
        DepthBounds(1.0, 1.0, 2.0, 3.0)
    with pytest.raises(InvalidConfig):
        DepthBounds(2.0, 1.0, 3.0, 4.0)


def test_coupling_constraints_enforced():
    with pytest.raises(InvalidConfig):
        ScoringConfig(shallow=DepthBounds(0.2, 0.5, 1.2, 2.4))  # upper != deep.max
    with pytest.raises(InvalidConfig):
        ScoringConfig(deep=DepthBounds(0.6, 1.5, 2.5, 3.5))  # lower != shallow.min


def test_mismatch_weight_range():
    with pytest.raises(InvalidConfig):
        ScoringConfig(mismatch_weight=1.0)


def test_config_json_round_trip():
    other = ScoringConfig.from_json(CFG.to_json())
    assert other == CFG


def test_per_acupoint_depth_override():
    meta = {"depths_cun": {"shallow": [0.3, 0.5], "deep": [0.6, 0.8],
                           "lower": 0.15, "upper": 1.0}}
    cfg = CFG.with_acupoint_depths(meta)
    assert cfg.deep.min == pytest.approx(0.6 * 3.33)
    assert cfg.deep.max == pytest.approx(0.8 * 3.33)
    assert cfg.shallow.upper == cfg.deep.max
    assert cfg.deep.lower == cfg.shallow.min
    # a 0.7 cun needle lands in the correct deep range
    assert score_deep(0.7 * 3.33, cfg) == cfg.c
