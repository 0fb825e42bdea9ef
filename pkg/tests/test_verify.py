import pytest

from flowembed.errors import ParameterError
from flowembed.flows import DiscreteSystem
from flowembed.phi import iterate_embedding
from flowembed.tiling import build_tiling
from flowembed.verify import SUB_VALUES, PhiEmbedding, default_params, fiber_marker, suspension_checks


@pytest.mark.parametrize("k", range(len(SUB_VALUES)))
def test_fiber_markers_have_distinct_sub_cells(k):
    m = fiber_marker(k)
    m.validate()
    til = build_tiling(m)
    # the sub-marker between two value-1 sites must own a nonempty cell,
    # otherwise every fiber gives the same tiling
    assert til.cell(12) is not None and til.cell(12).length > 0
    assert all(m.value(n) == 1.0 for n in range(-984, 1000, 24))


def test_fiber_sub_cell_grows_with_value():
    lengths = [build_tiling(fiber_marker(k)).cell(12).length for k in range(len(SUB_VALUES))]
    assert lengths == sorted(lengths) and len(set(lengths)) == len(lengths)


def test_embedding_state_bounds():
    with pytest.raises(ParameterError):
        PhiEmbedding(default_params(), states=12)
    with pytest.raises(ParameterError):
        suspension_checks(DiscreteSystem.cyclic(30))


def test_iteration_step_bounds():
    with pytest.raises(ParameterError):
        iterate_embedding(None, steps=0)
