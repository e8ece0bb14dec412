import struct

import numpy as np
import pytest

from wdspca import io
from wdspca.crossval import partition
from wdspca.errors import FormatError, IoError, ParseError
from wdspca.metrics import ErrorCurve
from wdspca.pca import DataMatrix, fit
from wdspca.prtf import PrtfTensor, Scale


def test_matrix_roundtrip_bit_exact(tmp_path, rng):
    values = rng.standard_normal((7, 5))
    values[0, 0] = -0.0
    values[1, 1] = 5e-324
    m = DataMatrix(values)
    io.write_matrix(tmp_path / "a.wdsm", m)
    back = io.read_matrix(tmp_path / "a.wdsm")
    assert back.values.tobytes() == m.values.tobytes()
    assert back.subject_ids is None


def test_matrix_ids_roundtrip(tmp_path):
    m = DataMatrix(np.eye(3), ("ear-001", "oreille-é", ""))
    io.write_matrix(tmp_path / "a.wdsm", m)
    assert io.read_matrix(tmp_path / "a.wdsm").subject_ids == m.subject_ids


def test_matrix_layout():
    raw = io.matrix_to_bytes(DataMatrix([[1.0, 2.0]]))
    assert raw[:4] == b"WDSM"
    assert struct.unpack("<IQQ", raw[4:24]) == (1, 1, 2)
    assert np.frombuffer(raw[24:40], "<f8").tolist() == [1.0, 2.0]
    assert raw[40:] == b"\x00"


def test_matrix_without_id_flag_accepted():
    raw = io.matrix_to_bytes(DataMatrix([[1.0, 2.0]]))[:-1]
    assert io.matrix_from_bytes(raw).values.tolist() == [[1.0, 2.0]]


def test_matrix_bad_magic():
    raw = io.matrix_to_bytes(DataMatrix([[1.0]]))
    with pytest.raises(FormatError):
        io.matrix_from_bytes(b"XXXX" + raw[4:])


def test_matrix_truncated():
    raw = b"WDSM" + struct.pack("<IQQ", 1, 2, 2) + np.array([1.0, 2.0, 3.0], "<f8").tobytes()
    with pytest.raises(FormatError):
        io.matrix_from_bytes(raw)


def test_matrix_trailing_garbage():
    with pytest.raises(FormatError):
        io.matrix_from_bytes(io.matrix_to_bytes(DataMatrix([[1.0]])) + b"\x00")


def test_matrix_bad_version():
    raw = bytearray(io.matrix_to_bytes(DataMatrix([[1.0]])))
    raw[4] = 2
    with pytest.raises(FormatError):
        io.matrix_from_bytes(bytes(raw))


def test_matrix_rejects_nan_payload():
    raw = b"WDSM" + struct.pack("<IQQ", 1, 1, 1) + np.array([np.nan], "<f8").tobytes()
    with pytest.raises(FormatError):
        io.matrix_from_bytes(raw)


def test_read_missing_file(tmp_path):
    with pytest.raises(IoError):
        io.read_matrix(tmp_path / "nope.wdsm")


def test_model_roundtrip(tmp_path, rng):
    model = fit(rng.standard_normal((9, 13)))
    io.write_model(tmp_path / "m.wdsp", model)
    back = io.read_model(tmp_path / "m.wdsp")
    assert io.model_to_bytes(back) == io.model_to_bytes(model)
    raw = io.model_to_bytes(model)
    assert raw[:4] == b"WDSP"
    assert struct.unpack("<IQQ", raw[4:24]) == (1, 13, model.n_components)


def test_model_rejects_wrong_magic_and_version(rng):
    raw = io.model_to_bytes(fit(rng.standard_normal((4, 3))))
    with pytest.raises(FormatError):
        io.model_from_bytes(b"WDSM" + raw[4:])
    with pytest.raises(FormatError):
        io.model_from_bytes(raw[:4] + struct.pack("<I", 7) + raw[8:])


def test_tensor_roundtrip_preserves_scale(tmp_path, rng):
    for scale in (Scale.LINEAR, Scale.DB):
        t = PrtfTensor([100.0, 200.0, 400.0], [[0.0, -30.0], [90.0, 45.0]], rng.random((2, 3, 2)), scale)
        io.write_tensor(tmp_path / "t.wdst", t)
        back = io.read_tensor(tmp_path / "t.wdst")
        assert back.scale is scale
        assert io.tensor_to_bytes(back) == io.tensor_to_bytes(t)


def test_tensor_value_order():
    # file order is subject, direction, frequency
    t = PrtfTensor([1.0, 2.0], [[0.0, 0.0], [10.0, 0.0]], [[[1.0, 2.0], [3.0, 4.0]]], Scale.DB)
    raw = io.tensor_to_bytes(t)
    header = 4 + struct.calcsize("<IBQQQ")
    assert np.frombuffer(raw[header + 16 + 32:], "<f8").tolist() == [1.0, 3.0, 2.0, 4.0]


def test_partition_roundtrip(tmp_path):
    part = partition(23, 4, seed=9)
    io.write_partition(tmp_path / "p.csv", part)
    back = io.read_partition(tmp_path / "p.csv")
    assert back.assignments == part.assignments
    assert back.k_folds == 4


def test_csv_examples(tmp_path):
    (tmp_path / "a.csv").write_text("1,2\n3,4\n")
    assert io.read_csv_matrix(tmp_path / "a.csv").values.tolist() == [[1.0, 2.0], [3.0, 4.0]]
    (tmp_path / "b.csv").write_text("x,y\n1e3,-2.5E-1\n")
    assert io.read_csv_matrix(tmp_path / "b.csv").values.tolist() == [[1000.0, -0.25]]


def test_csv_ragged_row():
    with pytest.raises(ParseError) as err:
        io.parse_csv_matrix("1,2\n3,4\n5\n")
    assert err.value.row == 3


def test_csv_bad_cell():
    with pytest.raises(ParseError) as err:
        io.parse_csv_matrix("1,2\n3,abc\n")
    assert (err.value.row, err.value.column) == (2, 2)


def test_error_curve_roundtrip(tmp_path):
    curve = ErrorCurve((0, 2, 5), (1.0 / 3.0, 2.0e-17, 0.0))
    io.write_error_curve(tmp_path / "c.csv", curve)
    assert (tmp_path / "c.csv").read_text().splitlines()[0] == "m,mse"
    assert io.read_error_curve(tmp_path / "c.csv") == curve


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "out.wdsm"
    with pytest.raises(RuntimeError):
        with io.atomic_open(target) as fh:
            fh.write(b"partial")
            raise RuntimeError("boom")
    assert list(tmp_path.iterdir()) == []


def test_write_into_missing_directory(tmp_path):
    with pytest.raises(IoError):
        io.write_matrix(tmp_path / "missing" / "a.wdsm", DataMatrix([[1.0]]))


def test_topology_csv(tmp_path):
    io.write_topology(tmp_path / "t.csv", [[0, 1, 2], [2, 1, 3]])
    assert io.read_topology(tmp_path / "t.csv").tolist() == [[0, 1, 2], [2, 1, 3]]
    (tmp_path / "u.csv").write_text("0,1,2\n")
    assert io.read_topology(tmp_path / "u.csv").tolist() == [[0, 1, 2]]
