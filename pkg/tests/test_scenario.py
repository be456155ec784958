import json

import pytest

from madd.errors import (
    DuplicateUserId,
    MissingField,
    RangeViolation,
    ScenarioError,
    UnknownCommunity,
)
from madd.scenario import (
    SimulationParams,
    UserRecord,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    validate_params,
)
from madd.synthdata import build_synthetic_scenario


def minimal_scenario_dict(n_users=3, **params):
    return {
        "version": 1,
        "params": params,
        "communities": ["alpha", "beta"],
        "users": [
            {
                "user_id": f"u{i}",
                "follower_count": 10 * (i + 1),
                "retweet_count": 4,
                "quote_count": 2,
                "activity_histogram": [1] * 24,
            }
            for i in range(n_users)
        ],
        "content_catalog": [
            {"content_id": "d1", "topic": "alpha", "kind": "disinformation", "text": "x"}
        ],
    }


class TestLoading:
    def test_defaults_applied_when_theta_omitted(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(minimal_scenario_dict()))
        scenario = load_scenario(path)
        assert scenario.params.theta == 0.5
        assert scenario.params.gamma == 0.5
        assert scenario.params.malicious_freq_range == (1, 18)

    def test_m_exceeding_m0_rejected(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(minimal_scenario_dict(m=7, m0=5)))
        with pytest.raises(RangeViolation, match="m <= m0"):
            load_scenario(path)

    def test_reference_population_loads(self, tmp_path):
        scenario = build_synthetic_scenario(n_users=689, seed=7)
        path = tmp_path / "paper.json"
        save_scenario(scenario, path)
        loaded = load_scenario(path)
        assert len(loaded.users) == 689
        assert len(loaded.communities) == 6

    def test_version_required(self, tmp_path):
        data = minimal_scenario_dict()
        del data["version"]
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(data))
        with pytest.raises(MissingField, match="version"):
            load_scenario(path)

    def test_users_required(self):
        data = minimal_scenario_dict()
        del data["users"]
        with pytest.raises(MissingField, match="users"):
            scenario_from_dict(data)

    def test_duplicate_user_rejected(self):
        data = minimal_scenario_dict()
        data["users"].append(dict(data["users"][0]))
        with pytest.raises(DuplicateUserId):
            scenario_from_dict(data)

    def test_unknown_topic_rejected(self):
        data = minimal_scenario_dict()
        data["content_catalog"][0]["topic"] = "nowhere"
        with pytest.raises(UnknownCommunity):
            scenario_from_dict(data)

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ScenarioError, match="unknown parameter"):
            scenario_from_dict(minimal_scenario_dict(thetta=0.4))

    def test_bad_histogram_rejected(self):
        data = minimal_scenario_dict()
        data["users"][0]["activity_histogram"] = [1] * 23
        with pytest.raises(RangeViolation, match="24"):
            scenario_from_dict(data)

    def test_malformed_json_reported(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ScenarioError, match="not valid JSON"):
            load_scenario(path)


class TestRoundTrip:
    def test_save_load_equality(self, tmp_path):
        scenario = build_synthetic_scenario(n_users=60, communities=("alpha",), seed=5)
        path = tmp_path / "s.json"
        save_scenario(scenario, path)
        again = load_scenario(path)
        assert again == scenario
        assert again.digest() == scenario.digest()

    def test_identical_bytes_identical_scenario(self, tmp_path):
        data = json.dumps(minimal_scenario_dict())
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        a.write_text(data)
        b.write_text(data)
        assert load_scenario(a) == load_scenario(b)


class TestSidecarUsers:
    def test_json_sidecar(self, tmp_path):
        data = minimal_scenario_dict()
        users = data.pop("users")
        data["users_file"] = "users.json"
        (tmp_path / "users.json").write_text(json.dumps(users))
        (tmp_path / "scenario.json").write_text(json.dumps(data))
        scenario = load_scenario(tmp_path / "scenario.json")
        assert len(scenario.users) == 3

    def test_csv_sidecar_with_bracketed_histogram(self, tmp_path):
        data = minimal_scenario_dict()
        data.pop("users")
        data["users_file"] = "users.csv"
        histogram = "[" + " ".join(["2"] * 24) + "]"
        rows = [
            "user_id,follower_count,following_count,post_count,retweet_count,quote_count,description,activity_histogram",
            f'u0,100,5,3,4,2,hello,"{histogram}"',
            f'u1,50,5,3,1,0,there,"{histogram}"',
            f'u2,10,5,3,0,0,works,"{histogram}"',
        ]
        (tmp_path / "users.csv").write_text("\n".join(rows))
        (tmp_path / "scenario.json").write_text(json.dumps(data))
        scenario = load_scenario(tmp_path / "scenario.json")
        assert scenario.users[0].activity_histogram == tuple([2] * 24)
        assert scenario.users[0].share_total == 6


class TestValidateParams:
    def test_defaults_are_clean(self):
        assert validate_params(SimulationParams()) == []

    def test_gamma_boundary_excluded(self):
        violations = validate_params(SimulationParams(gamma=1.0))
        assert any(v.field == "gamma" for v in violations)

    def test_window_beyond_total_steps(self):
        params = SimulationParams(
            total_steps=72,
            intervention_windows={"early": (12, 80), "mid": (36, 72), "late": (48, 72)},
        )
        violations = validate_params(params)
        assert any("early" in v.field for v in violations)

    def test_ratio_sum_capped(self):
        violations = validate_params(
            SimulationParams(malicious_ratio=0.6, legitimate_ratio=0.5)
        )
        assert any("ratio" in v.field for v in violations)

    def test_violation_names_field_value_constraint(self):
        v = validate_params(SimulationParams(xi=-1.0))[0]
        assert v.field == "xi"
        assert v.value == -1.0
        assert ">= 0" in v.constraint


def test_share_total_is_retweets_plus_quotes():
    user = UserRecord(user_id="u", follower_count=1, retweet_count=7, quote_count=5)
    assert user.share_total == 12


def test_all_model_inputs_reachable_from_scenario():
    """Every quantity the attribute formulas, network build and engine read
    must be reachable from a loaded Scenario."""
    scenario = build_synthetic_scenario(n_users=60, communities=("alpha",), seed=5)
    paths = {
        "theta": scenario.params.theta,
        "xi": scenario.params.xi,
        "gamma": scenario.params.gamma,
        "beta": scenario.params.beta,
        "delta": scenario.params.delta,
        "tau": scenario.params.tau,
        "m0": scenario.params.m0,
        "m": scenario.params.m,
        "total_steps": scenario.params.total_steps,
        "malicious_ratio": scenario.params.malicious_ratio,
        "legitimate_ratio": scenario.params.legitimate_ratio,
        "malicious_freq_range": scenario.params.malicious_freq_range,
        "legitimate_freq_range": scenario.params.legitimate_freq_range,
        "early_window": scenario.params.intervention_windows["early"],
        "mid_window": scenario.params.intervention_windows["mid"],
        "late_window": scenario.params.intervention_windows["late"],
        "repost_probability": scenario.params.repost_probability,
        "rng_seed": scenario.params.rng_seed,
        "follower_count": scenario.users[0].follower_count,
        "share_total": scenario.users[0].share_total,
        "activity_histogram": scenario.users[0].activity_histogram,
        "historical_texts": scenario.users[0].historical_texts,
        "communities": scenario.communities,
        "disinformation": scenario.disinformation_for("alpha"),
        "evaluator_backend": scenario.evaluator_config.backend,
    }
    for name, value in paths.items():
        assert value is not None, name
