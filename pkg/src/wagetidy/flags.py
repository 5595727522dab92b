"""Per-person derivation flags raised while tidying.

Flags never abort a run; they travel with the stage outputs and surface
in the validation report as warn entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

__all__ = ["Flag"]


@dataclass(frozen=True)
class Flag:
    category: str
    case_id: int | None = None
    detail: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"category": self.category, "id": self.case_id, "detail": self.detail}

    @staticmethod
    def from_json(obj: dict[str, Any]) -> "Flag":
        return Flag(category=obj["category"], case_id=obj["id"], detail=obj["detail"])
