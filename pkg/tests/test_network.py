import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intralink.constructions import gen_resnet_sawtooth, gen_intra_sawtooth
from intralink.network import (LayerSpec, NetworkSpec, NotApplicable, ParseError,
                               ValidationError, check, evaluate_point, forward_symbolic,
                               parse, permute_layer, rewrite_first_layer_linked, serialize,
                               to_dict, validate)
from intralink.pwl import Pwl, equals, relu
from intralink.verify import FuzzConfig, random_net

X = Pwl.identity()


def probes(n=40, lo=-6, hi=6):
    rng = random.Random("probes")
    return [F(rng.randint(lo * 16, hi * 16), 16) for _ in range(n)]


def net_two_relus():
    # sigma(x) + sigma(2x - 1)
    return NetworkSpec.make([LayerSpec.make([[1], [2]], [0, -1])], [1, 1])


@pytest.mark.parametrize("mode", ["ff", "intra2"])
@pytest.mark.parametrize("seed", range(8))
def test_forward_matches_pointwise(mode, seed):
    net = random_net(random.Random(f"net:{seed}"), FuzzConfig(seed), mode)
    f = forward_symbolic(net)
    for x in probes():
        assert f(x) == evaluate_point(net, x)


def test_linked_pair_semantics():
    # f1 = s(x), f2 = s(x + 1 - f1); f2 is 1 for x >= 0 and x + 1 on [-1, 0]
    layer = LayerSpec.make([[1], [1]], [0, 1], link_group=2)
    net = NetworkSpec.make([layer], [0, 1])
    f = forward_symbolic(net)
    assert equals(f, relu(X + 1) - relu(X))
    for x in probes():
        assert evaluate_point(net, x) == max(x + 1 - max(x, 0), 0)


def test_resnet_k2():
    f = forward_symbolic(gen_resnet_sawtooth(2).net)
    assert f.num_pieces == 4


def test_trace_has_every_neuron():
    net = gen_intra_sawtooth([4, 4]).net
    f, trace = forward_symbolic(net, keep_trace=True)
    assert [len(p) for p in trace.post] == [4, 4]
    assert trace.output == f


@pytest.mark.parametrize("mutate, fragment", [
    (lambda n: NetworkSpec.make([LayerSpec.make([[1], [1], [1]], [0, 0, 0], link_group=2)],
                                [1, 1, 1]), "link_group"),
    (lambda n: NetworkSpec.make([LayerSpec.make([[1, 2]], [0])], [1]), "fan-in"),
    (lambda n: NetworkSpec.make([LayerSpec.make([[1]], [0, 1])], [1]), "biases"),
    (lambda n: NetworkSpec.make([LayerSpec.make([[1]], [0])], [1, 2]), "output.coeffs"),
    (lambda n: NetworkSpec.make([], [1]), "layers"),
    (lambda n: NetworkSpec.make([LayerSpec.make([[1]], [0])], [1], arch="recurrent"), "arch"),
])
def test_validate_reports(mutate, fragment):
    net = mutate(None)
    problems = validate(net)
    assert any(fragment in p for p in problems), problems
    with pytest.raises(ValidationError):
        check(net)


def test_valid_nets_have_no_problems():
    assert validate(net_two_relus()) == []
    assert validate(gen_resnet_sawtooth(3).net) == []


@pytest.mark.parametrize("seed", range(100))
def test_serialize_roundtrip(seed):
    rng = random.Random(f"roundtrip:{seed}")
    net = random_net(rng, FuzzConfig(seed), rng.choice(["ff", "intra2"]))
    blob = serialize(net)
    assert parse(blob) == net
    assert serialize(parse(blob)) == blob


def test_serialize_is_canonical_json():
    blob = serialize(net_two_relus())
    assert json.loads(blob) == to_dict(net_two_relus())
    assert serialize(net_two_relus()) == blob


@pytest.mark.parametrize("text", [
    "not json",
    "{}",
    '{"input_dim": 1, "layers": "x", "output": {"coeffs": ["1"], "bias": "0"}}',
])
def test_parse_rejects_garbage(text):
    with pytest.raises(ParseError):
        parse(text)


def test_parse_rejects_zero_denominator():
    doc = to_dict(net_two_relus())
    doc["layers"][0]["biases"][0] = "1/0"
    with pytest.raises(ParseError):
        parse(json.dumps(doc))


def test_parse_rejects_float_literal():
    doc = to_dict(net_two_relus())
    doc["layers"][0]["biases"][0] = 0.5
    with pytest.raises(ParseError):
        parse(json.dumps(doc))


# -- rewrite -----------------------------------------------------------------------


def test_rewrite_example_slopes():
    net = NetworkSpec.make([LayerSpec.make([[1], [2], [-1]], [0, -1, 3])], [1, 1, 1])
    new = rewrite_first_layer_linked(net, slopes=(1, 2))
    assert new.layers[0].groups() == [2, 1]
    assert equals(forward_symbolic(new), forward_symbolic(net))
    assert [row[0] for row in new.layers[0].weights[:2]] == [1, 2]


def test_rewrite_default_slopes():
    net = NetworkSpec.make([LayerSpec.make([[1], [2], [3], [-2]], [0, -1, 1, 1])],
                           [1, -2, F(1, 2), 3])
    new = rewrite_first_layer_linked(net)
    assert equals(forward_symbolic(new), forward_symbolic(net))


def test_rewrite_not_applicable():
    with pytest.raises(NotApplicable):
        rewrite_first_layer_linked(net_two_relus())  # width 2
    mixed = NetworkSpec.make([LayerSpec.make([[1], [-1], [0]], [0, 0, 1])], [1, 1, 1])
    with pytest.raises(NotApplicable):
        rewrite_first_layer_linked(mixed)
    with pytest.raises(NotApplicable):
        rewrite_first_layer_linked(gen_intra_sawtooth([4]).net)
    bad = NetworkSpec.make([LayerSpec.make([[1], [2], [-1]], [0, -1, 3])], [1, 1, 1])
    with pytest.raises(NotApplicable):
        rewrite_first_layer_linked(bad, slopes=(2, 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_permutation_invariance(seed):
    rng = random.Random(f"perm:{seed}")
    net = random_net(rng, FuzzConfig(seed, max_depth=3), "ff")
    idx = rng.randrange(len(net.layers))
    perm = list(range(net.layers[idx].width))
    rng.shuffle(perm)
    assert equals(forward_symbolic(permute_layer(net, idx, perm)), forward_symbolic(net))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(-4, 4, max_denominator=8), min_size=4, max_size=4))
def test_linked_even_neuron_never_exceeds_predecessor(params):
    """With nonnegative link input, the second neuron of a pair is a ReLU of
    something at most its own unlinked pre-activation."""
    a, b, c, d = params
    layer = LayerSpec.make([[a], [c]], [b, d], link_group=2)
    net = NetworkSpec.make([layer], [0, 1])
    f = forward_symbolic(net)
    unlinked = relu(c * X + d)
    for x in probes(20):
        assert 0 <= f(x) <= unlinked(x)
