"""
Module that saves and loads training checkpoints.

File layout, all integers little-endian:
    magic (8 bytes) | version (u32) | header length (u64) | header (UTF-8 JSON, sorted keys)
    | tensor payload (float64, '<f8', in header order) | sha256 of everything before it (32 bytes)
The header carries the config echo, counters, RNG states and the name/shape of every tensor.
"""

# local imports
from src.constants import constants as const
from src.errors import errors as err
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass, field
import hashlib
import json
import os
import struct
import numpy as np

logger = get_logger(__name__)

PREFIX = struct.Struct('<8sIQ')
DIGEST_SIZE = hashlib.sha256().digest_size
GROUPS = ('nav', 'tpn')

@dataclass
class Checkpoint():
    """
    stage is 'nav' after navigation training and 'tpn' once a TPN is attached.
    tpn is None for navigation-only checkpoints.
    """
    config: dict
    nav: dict
    tpn: dict = None
    stage: str = 'nav'
    episodes: int = 0
    rng_states: dict = field(default_factory=dict)
    history: dict = field(default_factory=dict)
    version: int = const.CHECKPOINT_VERSION

    @property
    def has_tpn(self) -> bool:
        return bool(self.tpn)

    def require_tpn(self, path_file:str=''):
        if not self.has_tpn:
            raise err.TpnMissingError("The checkpoint holds no TPN parameters; run train-tpn first.", path_file)

def _tensors(checkpoint:Checkpoint) -> list:
    tensors = []
    for group in GROUPS:
        for name, array in sorted((getattr(checkpoint, group) or {}).items()):
            tensors.append((group, name, np.ascontiguousarray(array, dtype='<f8')))
    return tensors

def to_bytes(checkpoint:Checkpoint) -> bytes:
    tensors = _tensors(checkpoint)
    header = {
        'config': checkpoint.config,
        'stage': checkpoint.stage,
        'episodes': int(checkpoint.episodes),
        'rng_states': checkpoint.rng_states,
        'history': checkpoint.history,
        'has_tpn': checkpoint.tpn is not None,
        'tensors': [{'group': g, 'name': n, 'shape': list(a.shape)} for g, n, a in tensors],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode('utf-8')
    body = PREFIX.pack(const.CHECKPOINT_MAGIC, checkpoint.version, len(header_bytes)) + header_bytes
    body += b''.join(a.tobytes() for _, _, a in tensors)
    return body + hashlib.sha256(body).digest()

def from_bytes(data:bytes, path_file:str='') -> Checkpoint:
    if len(data) < PREFIX.size:
        raise err.ChecksumError(f"The checkpoint '{path_file}' is truncated ({len(data)} bytes).", path_file)
    magic, version, header_length = PREFIX.unpack_from(data)
    if magic != const.CHECKPOINT_MAGIC:
        raise err.CheckpointError(f"'{path_file}' is not a checkpoint file.", path_file)
    if version != const.CHECKPOINT_VERSION:
        raise err.CheckpointVersionError(f"Checkpoint format version {version} is not supported "
                                         f"(expected {const.CHECKPOINT_VERSION}).", path_file, version)
    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if len(data) < PREFIX.size + DIGEST_SIZE or hashlib.sha256(body).digest() != digest:
        raise err.ChecksumError(f"The checkpoint '{path_file}' failed its checksum.", path_file)
    offset = PREFIX.size
    try:
        header = json.loads(body[offset:offset + header_length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as perr:
        raise err.CheckpointError(f"The checkpoint header of '{path_file}' is unreadable: {perr}", path_file)
    offset += header_length
    groups = {'nav': {}, 'tpn': {} if header['has_tpn'] else None}
    for entry in header['tensors']:
        count = int(np.prod(entry['shape'], dtype=np.int64))
        array = np.frombuffer(body, dtype='<f8', count=count, offset=offset).reshape(entry['shape'])
        groups[entry['group']][entry['name']] = array.astype(np.float64)
        offset += count * 8
    if offset != len(body):
        raise err.ChecksumError(f"The checkpoint '{path_file}' payload does not match its header.", path_file)
    return Checkpoint(config=header['config'], nav=groups['nav'], tpn=groups['tpn'], stage=header['stage'],
                      episodes=header['episodes'], rng_states=header['rng_states'], history=header['history'],
                      version=version)

def save_checkpoint(path_file:str, checkpoint:Checkpoint):
    """
    Writes atomically: a temporary file next to the target is renamed over it.
    """
    directory = os.path.dirname(os.path.abspath(path_file))
    os.makedirs(directory, exist_ok=True)
    temporary = f"{path_file}.tmp"
    with open(temporary, 'wb') as f:
        f.write(to_bytes(checkpoint))
    os.replace(temporary, path_file)
    logger.info(f"Saved a '{checkpoint.stage}' checkpoint after {checkpoint.episodes} episodes to '{path_file}'.")

def load_checkpoint(path_file:str) -> Checkpoint:
    if not os.path.isfile(path_file):
        raise err.CheckpointError(f"The checkpoint '{path_file}' does not exist.", path_file)
    with open(path_file, 'rb') as f:
        checkpoint = from_bytes(f.read(), path_file)
    logger.info(f"Loaded a '{checkpoint.stage}' checkpoint ({checkpoint.episodes} episodes) from '{path_file}'.")
    return checkpoint
