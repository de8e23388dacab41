import json

import numpy as np
import pytest

from modframe import (
    BundleParseError,
    BundleSchemaError,
    BundleValidationError,
    RunReport,
    bundle_from_json,
    dumps,
    load_bundle,
    load_report,
    save_bundle,
    save_report,
)
from modframe.random_instances import CapExceeded, InstanceSpec, rand_instance

MINIMAL = {
    "version": "1",
    "algebra": {"spectrum": ["t1"]},
    "module": {"spectrum": ["t1"], "fiber_dims": [1]},
    "group": {"elements": ["e"], "table": [[0]]},
    "representation": {"images": {"e": {"fibers": [[[[1, 0]]]]}}},
    "generators": {"phi": {"generators": [{"fibers": [[[2, 0]]]}]}},
}


def test_minimal_bundle_loads():
    b = bundle_from_json(MINIMAL)
    assert len(b.group) == 1 and b.module.fiber_dims == (1,)
    assert np.allclose(b.generators["phi"][0].fibers[0], [2])


def test_parse_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(BundleParseError):
        load_bundle(p)
    with pytest.raises(BundleParseError):
        load_bundle(tmp_path / "missing.json")


def test_schema_error_has_pointer():
    obj = json.loads(json.dumps(MINIMAL))
    obj["module"]["fiber_dims"] = [-1]
    with pytest.raises(BundleSchemaError) as exc:
        bundle_from_json(obj)
    assert exc.value.pointer == "/module/fiber_dims/0"
    with pytest.raises(BundleSchemaError):
        bundle_from_json({**MINIMAL, "version": "99"})


def test_non_associative_table_rejected():
    obj = json.loads(json.dumps(MINIMAL))
    table = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    obj["group"] = {"elements": list("eabcd"), "table": table}
    del obj["representation"]
    with pytest.raises(BundleValidationError, match=r"not associative at \('.*', '.*', '.*'\)") as exc:
        bundle_from_json(obj)
    assert exc.value.pointer == "/group/table"


def test_bad_representation_rejected():
    obj = json.loads(json.dumps(MINIMAL))
    obj["representation"]["images"]["e"] = {"fibers": [[[[2, 0]]]]}
    with pytest.raises(BundleValidationError):
        bundle_from_json(obj)
    obj["representation"]["images"] = {}
    with pytest.raises(BundleValidationError, match="missing images"):
        bundle_from_json(obj)


def test_wrong_vector_length():
    obj = json.loads(json.dumps(MINIMAL))
    obj["vectors"] = {"x": {"fibers": [[[1, 0], [2, 0]]]}}
    with pytest.raises(BundleValidationError) as exc:
        bundle_from_json(obj)
    assert exc.value.pointer == "/vectors/x"


def test_round_trip(tmp_path):
    b = rand_instance(InstanceSpec(points=2, group="S3", seed=4))
    save_bundle(b, tmp_path / "b.json")
    back = load_bundle(tmp_path / "b.json")
    assert back.digest() == b.digest()
    assert dumps(back.to_json()) == dumps(b.to_json())
    assert all(back.vectors[k] == b.vectors[k] for k in b.vectors)


def test_rand_determinism_and_validation():
    a = rand_instance(InstanceSpec(seed=0))
    assert a.digest() == rand_instance(InstanceSpec(seed=0)).digest()
    assert a.digest() != rand_instance(InstanceSpec(seed=1)).digest()
    for name in ("trivial", "Z2", "Z4", "S3", "D4", "Z2xZ2", "S4"):
        b = rand_instance(InstanceSpec(points=2, max_dim=8, group=name, seed=5))
        b.representation.validate()


def test_rand_caps():
    for spec in (InstanceSpec(points=9), InstanceSpec(max_dim=9), InstanceSpec(generators=5),
                 InstanceSpec(group="Z25")):
        with pytest.raises(CapExceeded):
            rand_instance(spec)


def test_dumps_is_deterministic():
    assert dumps({"b": 1.0, "a": [0.1, 2]}) == '{"a":[0.10000000000000001,2],"b":1.0}'
    assert dumps({"x": float("nan")}) == '{"x":null}'


def test_report_round_trip(tmp_path):
    r = RunReport("demo", "abc", {"value": 0.5}, {"ok": True})
    save_report(r, tmp_path / "r.json")
    back = load_report(tmp_path / "r.json")
    assert back.passed and back.results == {"value": 0.5}
    assert "wall_time" not in (tmp_path / "r.json").read_text()
