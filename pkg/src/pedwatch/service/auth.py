"""Credential storage and expiring session tokens.

Passwords are scrypt-hashed with a per-user random salt; nothing
plaintext ever touches disk. Tokens are opaque random strings with a
server-side expiry (default 12 h); the clock is injectable so expiry is
testable without sleeping.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

_SCRYPT_N = 2**14
_SCRYPT_R = 8
_SCRYPT_P = 1

DEFAULT_TTL_S = 12 * 3600.0

ROLES = ("reviewer", "admin")


def hash_password(password: str, salt: bytes | None = None) -> str:
    salt = salt if salt is not None else secrets.token_bytes(16)
    digest = hashlib.scrypt(
        password.encode(), salt=salt, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P
    )
    return f"scrypt${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, salt_hex, digest_hex = stored.split("$")
        if scheme != "scrypt":
            return False
        salt = bytes.fromhex(salt_hex)
        expected = bytes.fromhex(digest_hex)
    except ValueError:
        return False
    candidate = hashlib.scrypt(
        password.encode(), salt=salt, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P
    )
    return hmac.compare_digest(candidate, expected)


@dataclass(frozen=True)
class User:
    user_id: str
    password_hash: str
    role: str = "reviewer"

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")


def write_users_file(path: Path, users: list[User]) -> None:
    doc = {
        "users": [
            {"user_id": u.user_id, "password_hash": u.password_hash, "role": u.role}
            for u in users
        ]
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_users_file(path: Path) -> dict[str, User]:
    doc = json.loads(path.read_text())
    users = {}
    for rec in doc["users"]:
        user = User(
            user_id=rec["user_id"],
            password_hash=rec["password_hash"],
            role=rec.get("role", "reviewer"),
        )
        if user.user_id in users:
            raise ValueError(f"duplicate user {user.user_id!r} in {path}")
        users[user.user_id] = user
    return users


def authenticate(users: dict[str, User], user_id: str, password: str) -> User | None:
    """Constant-shape credential check: same work whether the user exists."""
    user = users.get(user_id)
    stored = user.password_hash if user else hash_password("", b"\x00" * 16)
    ok = verify_password(password, stored)
    return user if (user is not None and ok) else None


@dataclass
class TokenStore:
    """Opaque bearer tokens with absolute expiry, clock injectable."""

    ttl_s: float = DEFAULT_TTL_S
    clock: Callable[[], float] = time.time
    _tokens: dict[str, tuple[str, float]] = field(default_factory=dict)

    def issue(self, user_id: str) -> str:
        token = secrets.token_urlsafe(32)
        self._tokens[token] = (user_id, self.clock() + self.ttl_s)
        return token

    def validate(self, token: str) -> str | None:
        """User id for a live token, None for unknown or expired ones."""
        entry = self._tokens.get(token)
        if entry is None:
            return None
        user_id, expires_at = entry
        if self.clock() >= expires_at:
            del self._tokens[token]
            return None
        return user_id

    def revoke(self, token: str) -> None:
        self._tokens.pop(token, None)
