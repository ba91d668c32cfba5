import struct

import numpy as np
import pytest

from src.numeric import (
    FormatError,
    Linear,
    decode_tensor,
    encode_tensor,
    load_checkpoint,
    load_tensor,
    save_checkpoint,
    save_tensor,
)


def test_header_layout():
    encoded = encode_tensor(np.zeros((2, 3), dtype=np.float32))
    assert encoded[:4] == b"AMMT"
    assert struct.unpack("<III", encoded[4:16]) == (2, 2, 3)
    assert len(encoded) == 16 + 6 * 4


def test_file_round_trip(tmp_path):
    array = np.random.default_rng(0).normal(size=(4, 5, 2)).astype(np.float32)
    save_tensor(tmp_path / "t.ammt", array)
    np.testing.assert_array_equal(load_tensor(tmp_path / "t.ammt"), array)


def test_bad_magic_reports_offset():
    with pytest.raises(FormatError) as exc:
        decode_tensor(b"XXXX" + b"\x00" * 8, 0, "blob")
    assert exc.value.offset == 0
    assert exc.value.path == "blob"


def test_truncated_file_is_format_error(tmp_path):
    path = tmp_path / "t.ammt"
    save_tensor(path, np.ones((8, 8), dtype=np.float32))
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(FormatError) as exc:
        load_tensor(path)
    assert str(path) in str(exc.value)
    assert exc.value.offset == 16


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "t.ammt"
    path.write_bytes(encode_tensor(np.ones(3)) + b"\x00")
    with pytest.raises(FormatError):
        load_tensor(path)


def test_missing_tensor_file(tmp_path):
    with pytest.raises(FormatError):
        load_tensor(tmp_path / "absent.ammt")


def test_checkpoint_index_maps_names_to_offsets(tmp_path):
    layer = Linear(3, 2, np.random.default_rng(0))
    index_path = save_checkpoint(tmp_path / "model.ammt", layer.state_dict(), metadata={"subject": "s01"})
    state, metadata = load_checkpoint(index_path)
    assert metadata == {"subject": "s01"}
    assert set(state) == {"weight", "bias"}
    np.testing.assert_array_equal(state["weight"], layer.weight.numpy())

    other = Linear(3, 2, np.random.default_rng(1))
    other.load_state_dict(state)
    np.testing.assert_array_equal(other.weight.numpy(), layer.weight.numpy())


def test_checkpoint_with_corrupt_index(tmp_path):
    index_path = tmp_path / "model.json"
    index_path.write_text("{not json")
    with pytest.raises(FormatError) as exc:
        load_checkpoint(index_path)
    assert exc.value.offset == 1
