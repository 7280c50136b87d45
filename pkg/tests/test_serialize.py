import numpy as np
import pytest

from adaptapprox.adapt import AdaptConfig
from adaptapprox.dataset import gen_synthetic2
from adaptapprox.gating import AdaptiveSystem
from adaptapprox.harness import SweepGrid
from adaptapprox.linear import LinearModel
from adaptapprox.serialize import (
    FormatError,
    config_from_kv,
    load_model,
    load_system,
    read_kv,
    save_config,
    save_model,
    save_system,
)
from adaptapprox.trees import greedy_miser, train_gbrt


class TestModels:
    def test_linear_round_trip(self, tmp_path):
        m = LinearModel([0.1, -1e-300, 3.0e10], -0.7)
        save_model(m, tmp_path / "m")
        back = load_model(tmp_path / "m")
        np.testing.assert_array_equal(back.weights, m.weights)
        assert back.intercept == m.intercept

    def test_trees_round_trip(self, tmp_path):
        ds = gen_synthetic2()
        ens = train_gbrt(ds, 7, 3, 0.3)
        save_model(ens, tmp_path / "t")
        back = load_model(tmp_path / "t")
        np.testing.assert_array_equal(back.score(ds.features), ens.score(ds.features))
        assert back.shrinkage == ens.shrinkage and back.used_features == ens.used_features

    def test_wrong_header(self, tmp_path):
        (tmp_path / "m").write_text("something-else 1\n")
        with pytest.raises(FormatError):
            load_model(tmp_path / "m")

    def test_future_version(self, tmp_path):
        save_model(LinearModel([1.0]), tmp_path / "m")
        text = (tmp_path / "m").read_text().replace("adaptapprox-linear 1", "adaptapprox-linear 9")
        (tmp_path / "m").write_text(text)
        with pytest.raises(FormatError):
            load_model(tmp_path / "m")

    def test_truncated(self, tmp_path):
        save_model(train_gbrt(gen_synthetic2(), 3, 2), tmp_path / "t")
        lines = (tmp_path / "t").read_text().splitlines()
        (tmp_path / "t").write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(FormatError):
            load_model(tmp_path / "t")


class TestSystems:
    def test_round_trip_with_f0(self, tmp_path):
        ds = gen_synthetic2()
        f0 = train_gbrt(ds, 5, 2)
        save_model(f0, tmp_path / "f0.model")
        sys = AdaptiveSystem(greedy_miser(ds, 3, 2, 0.1, 0.0), greedy_miser(ds, 4, 2, 0.1, 0.5),
                             f0_used_features=frozenset({0}), route_threshold=0.25,
                             f0_reference="f0.model", info={"trainer": "x", "support": (1,)})
        save_system(sys, tmp_path / "s.system")
        back = load_system(tmp_path / "s.system")
        X = ds.features
        np.testing.assert_array_equal(back.g.score(X), sys.g.score(X))
        np.testing.assert_array_equal(back.f1.score(X), sys.f1.score(X))
        np.testing.assert_array_equal(back.f0.score(X), f0.score(X))
        assert back.f0_used_features == {0} and back.route_threshold == 0.25
        assert back.info == {"trainer": "x", "support": [1]}

    def test_missing_f0_file_is_tolerated(self, tmp_path):
        sys = AdaptiveSystem(LinearModel([1.0]), LinearModel([2.0]), f0_reference="gone.model")
        save_system(sys, tmp_path / "s")
        back = load_system(tmp_path / "s")
        assert back.f0 is None and back.f0_reference == "gone.model"
        assert back.f0_used_features is None

    def test_rejects_non_system(self, tmp_path):
        with pytest.raises(TypeError):
            save_system(LinearModel([1.0]), tmp_path / "s")


class TestConfigs:
    def test_round_trip(self, tmp_path):
        cfg = AdaptConfig(gamma=0.0123, p_full=0.4, init="ones", init_trees=7)
        grid = SweepGrid((0.1, 0.2), (0.5,), (0.1, 1.0))
        save_config(tmp_path / "c", cfg, grid)
        kv = read_kv(tmp_path / "c")
        assert config_from_kv(kv, AdaptConfig) == cfg
        assert config_from_kv(kv, SweepGrid) == grid

    def test_comments_and_none(self, tmp_path):
        (tmp_path / "c").write_text("# header\ngamma = 0.5  # inline\ninit_trees = none\n\n")
        cfg = config_from_kv(read_kv(tmp_path / "c"), AdaptConfig)
        assert cfg.gamma == 0.5 and cfg.init_trees is None

    def test_strict_unknown_key(self):
        with pytest.raises(FormatError):
            config_from_kv({"bogus": "1"}, AdaptConfig, strict=True)
        assert config_from_kv({"bogus": "1"}, AdaptConfig) == AdaptConfig()

    def test_malformed_line(self, tmp_path):
        (tmp_path / "c").write_text("gamma 0.5\n")
        with pytest.raises(FormatError):
            read_kv(tmp_path / "c")
