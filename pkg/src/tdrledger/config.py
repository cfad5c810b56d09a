"""Runtime configuration: flat key=value file, overridable via TDR_* env vars.

Chain-defining parameters (departments, zones, admin identity, validators)
are copied into genesis.json at init time and are read from there afterwards,
so editing the config file never silently forks an existing store.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import err

_LIST_KEYS = {"departments", "sending_zones", "receiving_zones", "cors_origins"}
_INT_KEYS = {
    "api_port",
    "block_interval_seconds",
    "validator_count",
    "otp_ttl_seconds",
    "min_password_len",
    "scrypt_n",
    "scrypt_r",
    "scrypt_p",
}


@dataclass
class Config:
    data_dir: str = "./tdr-data"
    api_host: str = "127.0.0.1"
    api_port: int = 8545
    block_interval_seconds: int = 300
    departments: list[str] = field(default_factory=lambda: ["planning", "revenue", "survey"])
    sending_zones: list[str] = field(default_factory=lambda: ["SZ-A", "SZ-B"])
    receiving_zones: list[str] = field(default_factory=lambda: ["RZ-A", "RZ-B"])
    application_prefix: str = "APP-"
    admin_user_id: str = "admin"
    admin_password: str = "please-rotate-me"
    validator_count: int = 4
    validator_policies: str = ""
    otp_ttl_seconds: int = 600
    min_password_len: int = 8
    scrypt_n: int = 16384
    scrypt_r: int = 8
    scrypt_p: int = 1
    rng_seed: str = ""
    ekyc_profiles: str = ""
    cors_origins: list[str] = field(default_factory=list)

    def policy_map(self) -> dict[str, str]:
        """Parses "v2=silent,v3=equivocate" into {validator_id: policy}."""
        mapping: dict[str, str] = {}
        if not self.validator_policies.strip():
            return mapping
        for part in self.validator_policies.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise err("ConfigInvalid", f"bad validator policy entry {part!r}")
            vid, policy = part.split("=", 1)
            mapping[vid.strip()] = policy.strip()
        return mapping

    def seed_value(self) -> Optional[int]:
        if not self.rng_seed.strip():
            return None
        try:
            return int(self.rng_seed)
        except ValueError:
            raise err("ConfigInvalid", f"rng_seed must be an integer, got {self.rng_seed!r}")

    def validate(self) -> "Config":
        if self.validator_count < 1:
            raise err("ConfigInvalid", "validator_count must be at least 1")
        if self.block_interval_seconds < 0:
            raise err("ConfigInvalid", "block_interval_seconds must be >= 0")
        if self.min_password_len < 1:
            raise err("ConfigInvalid", "min_password_len must be at least 1")
        for key in ("departments", "sending_zones", "receiving_zones"):
            values = getattr(self, key)
            if not values:
                raise err("ConfigInvalid", f"{key} must name at least one entry")
            if len(set(values)) != len(values):
                raise err("ConfigInvalid", f"{key} contains duplicates")
        for n in (self.scrypt_n,):
            if n < 2 or n & (n - 1):
                raise err("ConfigInvalid", "scrypt_n must be a power of two >= 2")
        known = {f"v{i + 1}" for i in range(self.validator_count)}
        for vid, policy in self.policy_map().items():
            if vid not in known:
                raise err("ConfigInvalid", f"policy names unknown validator {vid!r}")
            if policy not in ("honest", "silent", "equivocate"):
                raise err("ConfigInvalid", f"unknown policy {policy!r} for {vid}")
        self.seed_value()
        return self


_FIELD_NAMES = {f.name for f in fields(Config)}


def _coerce(key: str, raw: str):
    if key in _LIST_KEYS:
        values = [part.strip() for part in raw.split(",") if part.strip()]
        return values
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise err("ConfigInvalid", f"{key} must be an integer, got {raw!r}")
    return raw


def parse_config_text(text: str) -> dict:
    """key=value lines; blank lines and #-comments ignored."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise err("ConfigInvalid", f"line {lineno}: expected key=value, got {stripped!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELD_NAMES:
            raise err("ConfigInvalid", f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def load_config(path: Optional[str] = None, env: Optional[dict] = None,
                overrides: Optional[dict] = None) -> Config:
    """File values, then TDR_* environment variables, then explicit overrides."""
    values: dict = {}
    if path is not None:
        if not os.path.exists(path):
            raise err("ConfigInvalid", f"config file {path} does not exist")
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    environment = os.environ if env is None else env
    for name in _FIELD_NAMES:
        env_key = "TDR_" + name.upper()
        if env_key in environment:
            values[name] = _coerce(name, environment[env_key])
    if overrides:
        for key, value in overrides.items():
            if key not in _FIELD_NAMES:
                raise err("ConfigInvalid", f"unknown config key {key!r}")
            values[key] = value
    return Config(**values).validate()
