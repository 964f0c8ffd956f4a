"""Task schemas: named, ordered label sets with a single- or multi-label mode."""

from __future__ import annotations

from dataclasses import dataclass

MULTI_CLASS = "multi_class"
MULTI_LABEL = "multi_label"


@dataclass(frozen=True)
class TaskSchema:
    name: str
    labels: tuple[str, ...]
    mode: str  # MULTI_CLASS or MULTI_LABEL

    def __post_init__(self):
        if self.mode not in (MULTI_CLASS, MULTI_LABEL):
            raise ValueError(f"unknown schema mode '{self.mode}'")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"schema '{self.name}' has duplicate labels")
        if not self.labels:
            raise ValueError(f"schema '{self.name}' has no labels")

    @property
    def k(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label '{label}' not in schema '{self.name}'") from None


# Article sentiment toward its subject matter. The class order is fixed;
# vote indices and probability vectors follow it everywhere.
SENTIMENT_LABELS = ("negatif", "netral", "positif")

# Topic tags for Indonesian conservation news. Order fixes how multi-label
# probability vectors and the attached comma-joined tags field are laid out.
TAG_LABELS = (
    "pertanian",
    "penelitian",
    "Aparatur Sipil Negara",
    "kebijakan",
    "hewan terancam punah",
    "bencana alam",
    "konflik",
    "tambang",
    "perusahaan",
    "pendanaan",
    "penyelamatan lingkungan",
    "sawit",
    "lahan",
    "Lembaga Swadaya Masyarakat",
    "foto",
    "trivia",
    "mangrove",
    "politik",
    "masyarakat desa",
    "inovasi",
    "tentang mongabay",
    "perdagangan",
    "kumpulan berita",
    "krisis",
    "penyakit",
    "sampah",
    "korupsi",
    "budidaya",
    "nelayan",
    "iklim/cuaca",
    "energi",
)

SENTIMENT_SCHEMA = TaskSchema(name="sentiment", labels=SENTIMENT_LABELS, mode=MULTI_CLASS)
TAGS_SCHEMA = TaskSchema(name="tags", labels=TAG_LABELS, mode=MULTI_LABEL)

BUILTIN_SCHEMAS: dict[str, TaskSchema] = {
    SENTIMENT_SCHEMA.name: SENTIMENT_SCHEMA,
    TAGS_SCHEMA.name: TAGS_SCHEMA,
}
