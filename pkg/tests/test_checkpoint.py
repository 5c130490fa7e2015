# local imports
from src.constants import constants as const
from src.diffcore import parameters as prm
from src.errors import errors as err
from src.harness import checkpoint as ckpt
from src.harness.evaluation import evaluate
from src.tpn import tpn
# external imports
import os
import numpy as np
import pytest

@pytest.fixture
def nav_checkpoint(model):
    return ckpt.Checkpoint(config={'use_org': True, 'seed': 7}, nav=model.snapshot(), episodes=12,
                           rng_states={'worker_0': [1, 2, 3]}, history={'loss': [0.5, 0.25]})

@pytest.fixture
def full_checkpoint(nav_checkpoint):
    nav_checkpoint.tpn = prm.snapshot(tpn.init_tpn_parameters(3))
    nav_checkpoint.stage = 'tpn'
    return nav_checkpoint

def test_bytes_roundtrip(full_checkpoint):
    data = ckpt.to_bytes(full_checkpoint)
    loaded = ckpt.from_bytes(data)
    assert ckpt.to_bytes(loaded) == data
    assert prm.bit_equal(loaded.nav, full_checkpoint.nav)
    assert prm.bit_equal(loaded.tpn, full_checkpoint.tpn)
    assert (loaded.stage, loaded.episodes, loaded.config) == ('tpn', 12, {'use_org': True, 'seed': 7})
    assert loaded.history == {'loss': [0.5, 0.25]}

def test_file_roundtrip_leaves_no_temporary(tmp_path, nav_checkpoint):
    path_file = str(tmp_path / 'run' / 'nav.ckpt')
    ckpt.save_checkpoint(path_file, nav_checkpoint)
    assert os.listdir(tmp_path / 'run') == ['nav.ckpt']
    loaded = ckpt.load_checkpoint(path_file)
    assert loaded.tpn is None and not loaded.has_tpn
    assert prm.bit_equal(loaded.nav, nav_checkpoint.nav)

def test_truncated_file_fails_its_checksum(tmp_path, nav_checkpoint):
    data = ckpt.to_bytes(nav_checkpoint)
    for length in (len(data) - 1, len(data) // 2, 10):
        with pytest.raises(err.ChecksumError):
            ckpt.from_bytes(data[:length])

def test_flipped_byte_fails_its_checksum(nav_checkpoint):
    data = bytearray(ckpt.to_bytes(nav_checkpoint))
    data[len(data) // 2] ^= 0xFF
    with pytest.raises(err.ChecksumError):
        ckpt.from_bytes(bytes(data))

def test_other_format_versions_are_rejected(nav_checkpoint):
    data = ckpt.to_bytes(nav_checkpoint)
    _, _, header_length = ckpt.PREFIX.unpack_from(data)
    bumped = ckpt.PREFIX.pack(const.CHECKPOINT_MAGIC, const.CHECKPOINT_VERSION + 1, header_length)
    with pytest.raises(err.CheckpointVersionError) as excinfo:
        ckpt.from_bytes(bumped + data[ckpt.PREFIX.size:])
    assert excinfo.value.version == const.CHECKPOINT_VERSION + 1

def test_foreign_files_are_rejected(tmp_path, nav_checkpoint):
    data = ckpt.to_bytes(nav_checkpoint)
    with pytest.raises(err.CheckpointError):
        ckpt.from_bytes(b'NOTACKPT' + data[8:])
    with pytest.raises(err.CheckpointError):
        ckpt.load_checkpoint(str(tmp_path / 'missing.ckpt'))

def test_adaptation_needs_a_tpn(nav_checkpoint, corridor):
    with pytest.raises(err.TpnMissingError):
        nav_checkpoint.require_tpn()
    with pytest.raises(err.TpnMissingError):
        evaluate(nav_checkpoint, [corridor], episodes_per_scene=1, adapt=True)

def test_stored_arrays_are_float64(full_checkpoint):
    loaded = ckpt.from_bytes(ckpt.to_bytes(full_checkpoint))
    assert all(array.dtype == np.float64 for array in loaded.nav.values())
    assert all(array.dtype == np.float64 for array in loaded.tpn.values())
