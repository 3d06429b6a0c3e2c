"""Deterministic entity identifiers.

Every cataloged entity (project, package, class, method) gets a 32-char
lowercase hex id: the first 128 bits of SHA-256 over the entity kind and its
canonical key. Ids are pure functions of the key, so re-cataloging an
unchanged tree reproduces them exactly.
"""

import hashlib

from .errors import InvalidArgumentError

EntityId = str

ENTITY_KINDS = ("project", "package", "class", "method")

_KIND_SEP = "\x1f"  # unit separator: keeps (kind, key) pairs injective


def assign_id(kind: str, canonical_key: str) -> EntityId:
    """Hash a kind + canonical key into a 32-hex-char entity id."""
    if kind not in ENTITY_KINDS:
        raise InvalidArgumentError(f"unknown entity kind: {kind!r}")
    if not canonical_key:
        raise InvalidArgumentError("canonical_key must be non-empty")
    digest = hashlib.sha256(f"{kind}{_KIND_SEP}{canonical_key}".encode("utf-8"))
    return digest.hexdigest()[:32]


def project_key(name: str, relpath: str) -> str:
    return f"project:{name}@{relpath}"


def package_key(project_relpath: str, package_path: str) -> str:
    return f"package:{project_relpath}/{package_path}"


def class_key(file_relpath: str) -> str:
    return f"class:{file_relpath}"


def method_key(file_relpath: str, signature: str, start_line: int) -> str:
    return f"method:{file_relpath}#{signature}@{start_line}"
