from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

ENTITY_PREFIX = "http://www.wikidata.org/entity/"
_ID_RE = re.compile(r"^[QP][0-9]+$")


class EntityId(str):
    """A Wikidata item or property identifier such as ``Q42`` or ``P106``.

    Behaves as a plain string (exact, case-sensitive equality) but refuses
    anything that is not a well-formed identifier.
    """

    __slots__ = ()

    def __new__(cls, value: str) -> "EntityId":
        if isinstance(value, EntityId):
            return value
        if not isinstance(value, str) or not _ID_RE.match(value):
            raise ValueError(f"not a Wikidata identifier: {value!r}")
        return super().__new__(cls, value)

    @classmethod
    def from_iri(cls, iri: str) -> "EntityId":
        if not iri.startswith(ENTITY_PREFIX):
            raise ValueError(f"not a Wikidata entity IRI: {iri!r}")
        return cls(iri[len(ENTITY_PREFIX):])

    def __repr__(self) -> str:
        return f"EntityId({str(self)!r})"


def is_entity_id(value: str) -> bool:
    return isinstance(value, str) and bool(_ID_RE.match(value))


class CandidateKind(str, Enum):
    FICTIONAL = "fictional"
    HUMAN = "human"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


# P21 values mapped onto the pronoun choice the baseline prompt needs.
GENDER_ITEMS = {
    "Q6581097": Gender.MALE,
    "Q2449503": Gender.MALE,  # trans man
    "Q6581072": Gender.FEMALE,
    "Q1052281": Gender.FEMALE,  # trans woman
}

# Default popularity thresholds (sitelinks) per candidate kind.
DEFAULT_MIN_SITELINKS = {CandidateKind.FICTIONAL: 30, CandidateKind.HUMAN: 70}


def passes_sitelinks(kind: CandidateKind, sitelinks: int, min_sitelinks: int) -> bool:
    """Fictional characters need strictly more sitelinks than the threshold, humans at least as many."""
    if kind is CandidateKind.FICTIONAL:
        return sitelinks > min_sitelinks
    return sitelinks >= min_sitelinks


@dataclass(frozen=True)
class CandidateRecord:
    id: EntityId
    label: str
    occupation_id: EntityId
    occupation_label: str
    sitelinks: int
    kind: CandidateKind

    def to_dict(self) -> dict:
        return {
            "id": str(self.id),
            "label": self.label,
            "occupation_id": str(self.occupation_id),
            "occupation_label": self.occupation_label,
            "sitelinks": self.sitelinks,
            "kind": self.kind.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateRecord":
        return cls(
            id=EntityId(d["id"]),
            label=d["label"],
            occupation_id=EntityId(d["occupation_id"]),
            occupation_label=d.get("occupation_label", ""),
            sitelinks=int(d["sitelinks"]),
            kind=CandidateKind(d["kind"]),
        )


@dataclass(frozen=True)
class TargetProfile:
    id: EntityId
    label: str
    occupations: tuple[tuple[EntityId, str], ...]
    has_date_of_death: bool
    gender: Gender = Gender.UNKNOWN

    def to_dict(self) -> dict:
        return {
            "id": str(self.id),
            "label": self.label,
            "occupations": [[str(i), lbl] for i, lbl in self.occupations],
            "has_date_of_death": self.has_date_of_death,
            "gender": self.gender.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TargetProfile":
        return cls(
            id=EntityId(d["id"]),
            label=d["label"],
            occupations=tuple((EntityId(i), lbl) for i, lbl in d.get("occupations", [])),
            has_date_of_death=bool(d.get("has_date_of_death", False)),
            gender=Gender(d.get("gender", "unknown")),
        )
