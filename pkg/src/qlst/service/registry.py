"""Immutable registry of checkpoints loaded from a models directory."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..models import CheckpointError, load_checkpoint, load_manifest


@dataclass
class RegistryEntry:
    model_id: str
    kind: str
    status: str                     # "ok" | "incompatible"
    config: dict = field(default_factory=dict)
    model: object = None

    def listing(self) -> dict:
        out = {"id": self.model_id, "kind": self.kind, "status": self.status}
        if self.status != "ok":
            return out
        if "latent_dim" in self.config:
            out["latent_dim"] = self.config["latent_dim"]
        if self.kind == "classifier":
            out["architecture"] = self.config.get("architecture")
        if self.kind == "qlst":
            out["class_id"] = self.config.get("class_id")
            out["class_name"] = self.config.get("class_name")
        return out


class ModelRegistry:
    """Loads every checkpoint directory under a root, once, at startup.

    Incompatible checkpoints are listed with status "incompatible" rather
    than failing startup.  qLST entries resolve their VAE and classifier
    dependencies to the unique vae/classifier in the registry unless their
    manifest config names explicit "vae_id"/"clf_id".
    """

    def __init__(self, root):
        self.root = Path(root)
        self.entries: dict[str, RegistryEntry] = {}
        if self.root.is_dir():
            for child in sorted(self.root.iterdir()):
                if not (child / "manifest.json").exists():
                    continue
                self.entries[child.name] = self._load(child)

    @staticmethod
    def _load(path: Path) -> RegistryEntry:
        try:
            manifest = load_manifest(path)
            model = load_checkpoint(path)
        except CheckpointError:
            return RegistryEntry(model_id=path.name, kind="unknown",
                                 status="incompatible")
        return RegistryEntry(model_id=path.name, kind=manifest["kind"],
                             status="ok", config=manifest["config"],
                             model=model)

    def listing(self) -> list[dict]:
        return [e.listing() for e in self.entries.values()]

    def get(self, model_id: str, kind: str) -> RegistryEntry:
        entry = self.entries.get(model_id)
        if entry is None or entry.status != "ok" or entry.kind != kind:
            raise KeyError(f"no loaded {kind} model with id {model_id!r}")
        return entry

    def _unique(self, kind: str) -> Optional[RegistryEntry]:
        found = [e for e in self.entries.values()
                 if e.kind == kind and e.status == "ok"]
        return found[0] if len(found) == 1 else None

    def resolve_deps(self, qlst_entry: RegistryEntry):
        """(vae, classifier) models backing a qlst entry."""
        cfg = qlst_entry.config
        vae = (self.get(cfg["vae_id"], "vae") if "vae_id" in cfg
               else self._unique("vae"))
        clf = (self.get(cfg["clf_id"], "classifier") if "clf_id" in cfg
               else self._unique("classifier"))
        if vae is None or clf is None:
            raise KeyError(f"qlst model {qlst_entry.model_id!r} cannot resolve "
                           "a unique vae and classifier in the registry")
        return vae.model, clf.model
