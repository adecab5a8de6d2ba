import numpy as np
import pytest

from pregelite import ConfigError
from pregelite.layout import LayoutMode, VertexStore, cold_dtype, hot_dtype

MODES = [LayoutMode.INTERLEAVED, LayoutMode.EXTERNALISED]


def test_hot_dtype_packed():
    dt = hot_dtype(np.float64)
    assert dt.itemsize == 9  # 1-byte flag + 8-byte value, no padding
    assert dt.names == ("flag", "msg")
    assert hot_dtype(np.uint32).itemsize == 5


def test_cold_dtype_packed():
    assert cold_dtype(np.float64).itemsize == 9
    assert cold_dtype(np.uint32).names == ("state", "halted")


@pytest.mark.parametrize("mode", MODES)
def test_zero_initialised(mode):
    s = VertexStore(7, np.float64, np.float64, mode)
    for p in (0, 1):
        assert not s.flags(p).any()
        assert np.all(s.values(p) == 0.0)
    assert np.all(s.state == 0.0)
    assert not s.halted.any()


@pytest.mark.parametrize("mode", MODES)
def test_views_alias_storage(mode):
    s = VertexStore(5, np.uint32, np.uint32, mode)
    s.flags(0)[3] = True
    s.values(0)[3] = 42
    assert bool(s.hot(0)["flag"][3]) is True
    assert s.hot(0)["msg"][3] == 42
    # the other parity is untouched
    assert not s.flags(1).any()
    s.state[2] = 9
    s.halted[2] = True
    rec = s.cold(2)
    assert rec["state"] == 9 and bool(rec["halted"]) is True


@pytest.mark.parametrize("mode", MODES)
def test_cold_record_writes_through(mode):
    s = VertexStore(4, np.int64, np.int64, mode)
    rec = s.cold(1)
    rec["state"] = 77
    rec["halted"] = True
    assert s.state[1] == 77
    assert bool(s.halted[1]) is True


@pytest.mark.parametrize("mode", MODES)
def test_cold_writes_leave_hot_untouched(mode):
    s = VertexStore(6, np.int64, np.int64, mode)
    s.values(0).fill(123)
    s.flags(1).fill(True)
    before0 = s.values(0).copy()
    before1 = s.flags(1).copy()
    s.state.fill(-5)
    s.halted.fill(True)
    assert np.array_equal(s.values(0), before0)
    assert np.array_equal(s.flags(1), before1)


def test_interleaved_record_is_one_struct():
    s = VertexStore(10, np.float64, np.float64, LayoutMode.INTERLEAVED)
    # hot0 + hot1 + cold packed into a single per-vertex record
    assert s.record_nbytes == 2 * 9 + 9
    assert not s.buffers_contiguous()
    # field views stride over whole records
    assert s.flags(0).strides[0] == s.record_nbytes


def test_externalised_buffers_are_dense():
    s = VertexStore(10, np.float64, np.float64, LayoutMode.EXTERNALISED)
    assert s.buffers_contiguous()
    assert s.hot(0).strides[0] == s.hot_itemsize == 9
    assert s.record_nbytes == 2 * 9 + 9  # same bytes, different placement


@pytest.mark.parametrize("mode", MODES)
def test_locks_lazy_and_stable(mode):
    s = VertexStore(5, np.int64, np.int64, mode)
    assert s._locks is None  # not built until asked for
    locks = s.locks
    assert len(locks) == 5
    assert s.locks is locks  # same table on re-access
    with locks[0]:
        assert locks[0].locked()


def test_negative_count_rejected():
    with pytest.raises(ConfigError):
        VertexStore(-1, np.int64, np.int64, LayoutMode.INTERLEAVED)


@pytest.mark.parametrize("mode", MODES)
def test_empty_store(mode):
    s = VertexStore(0, np.float64, np.int64, mode)
    assert s.flags(0).size == 0 and s.state.size == 0
