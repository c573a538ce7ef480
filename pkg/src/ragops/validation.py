from __future__ import annotations

from typing import Any, List, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import CorpusFormatError

RecordT = TypeVar("RecordT", bound=BaseModel)


class CorpusRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str = Field(min_length=1)
    title: str
    text: str
    entity_id: Optional[str] = None
    is_summary: bool = False

    @field_validator("text")
    @classmethod
    def _text_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("text is empty after trimming whitespace")
        return value


class QARecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str = Field(min_length=1)
    question: str = Field(min_length=1)
    answers: List[str] = Field(min_length=1)
    entity_id: str
    pageviews: int = Field(ge=0)
    relation: str = ""

    @field_validator("answers")
    @classmethod
    def _answers_not_blank(cls, value: List[str]) -> List[str]:
        if any(not answer.strip() for answer in value):
            raise ValueError("gold answers must be non-empty strings")
        return value


class VectorRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str = Field(min_length=1)
    vector: List[float] = Field(min_length=1)


def validate_record(
    model: Type[RecordT],
    payload: Any,
    *,
    line_number: Optional[int] = None,
) -> RecordT:
    """Validate one decoded JSON object, re-raising schema failures as ``CorpusFormatError``."""

    if not isinstance(payload, dict):
        raise CorpusFormatError(
            f"expected a JSON object, got {type(payload).__name__}", line_number=line_number
        )
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or '<record>'}: {error['msg']}"
            for error in exc.errors()
        )
        raise CorpusFormatError(
            f"{model.__name__} validation failed: {problems}", line_number=line_number
        ) from exc


__all__ = [
    "CorpusRecord",
    "QARecord",
    "VectorRecord",
    "validate_record",
]
