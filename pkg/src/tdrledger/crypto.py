"""Signing keys, addresses and password-based key encryption.

Ed25519 over canonical payload bytes for all signatures; an account address
is the lowercase hex SHA-256 of the raw 32-byte public key.  Vault records
encrypt a signing-key seed with AES-256-GCM under a scrypt-derived key, so a
wrong password fails authenticated decryption instead of yielding garbage.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import err

SEED_BYTES = 32


@dataclass(frozen=True)
class KeyPair:
    seed: bytes

    @property
    def private_key(self) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(self.seed)

    @property
    def public_bytes(self) -> bytes:
        return self.private_key.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )

    @property
    def public_hex(self) -> str:
        return self.public_bytes.hex()

    @property
    def address(self) -> str:
        return address_of(self.public_bytes)

    def sign(self, payload: bytes) -> bytes:
        return self.private_key.sign(payload)


def generate_keypair(rng=None) -> KeyPair:
    seed = rng.randbytes(SEED_BYTES) if rng is not None else os.urandom(SEED_BYTES)
    return KeyPair(seed)


def address_of(public_key: bytes) -> str:
    return hashlib.sha256(public_key).hexdigest()


def verify_signature(public_key_hex: str, payload: bytes, signature: bytes) -> bool:
    try:
        key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_key_hex))
        key.verify(signature, payload)
        return True
    except (InvalidSignature, ValueError):
        return False


@dataclass(frozen=True)
class KdfParams:
    n: int = 16384
    r: int = 8
    p: int = 1

    def derive(self, password: str, salt: bytes) -> bytes:
        return hashlib.scrypt(
            password.encode("utf-8"),
            salt=salt,
            n=self.n,
            r=self.r,
            p=self.p,
            maxmem=64 * 1024 * 1024,
            dklen=32,
        )


def encrypt_seed(seed: bytes, password: str, params: KdfParams, rng=None) -> tuple[bytes, bytes]:
    """Returns (salt, ciphertext); ciphertext = 12-byte nonce || AES-GCM box."""
    salt = rng.randbytes(16) if rng is not None else os.urandom(16)
    key = params.derive(password, salt)
    nonce = rng.randbytes(12) if rng is not None else os.urandom(12)
    box = AESGCM(key).encrypt(nonce, seed, None)
    return salt, nonce + box


def decrypt_seed(ciphertext: bytes, password: str, salt: bytes, params: KdfParams) -> bytes:
    key = params.derive(password, salt)
    nonce, box = ciphertext[:12], ciphertext[12:]
    try:
        return AESGCM(key).decrypt(nonce, box, None)
    except InvalidTag:
        raise err("BadPassword", "key decryption failed")
