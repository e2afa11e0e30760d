import json

import pytest

from quatrep.experiments import EXPERIMENTS, ConfigError


@pytest.mark.parametrize("name", ["torus-cg", "compat", "psh"])
def test_supporting_experiments_pass(name):
    rep = EXPERIMENTS[name](None)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    json.loads(rep.to_json())


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        EXPERIMENTS["psh"]({"nodes": 3})


def test_kernel_norm_custom_nodes():
    rep = EXPERIMENTS["kernel-norm"]({"nodes": 16, "dps": 30})
    assert rep.config["nodes"] == 16
    assert [c.name for c in rep.checks][0] == "normalization error at finest rule"
