"""Shared construction helpers for tests."""

from __future__ import annotations

import numpy as np

from weaklabel.corpus import Document
from weaklabel.runtime import LabelMatrix
from weaklabel.schema import MULTI_CLASS, MULTI_LABEL, TaskSchema


def toy_schema(k: int, mode: str = MULTI_CLASS, name: str = "toy") -> TaskSchema:
    return TaskSchema(name=name, labels=tuple(f"c{i}" for i in range(k)), mode=mode)


def toy_matrix(rows, k: int, mode: str = MULTI_CLASS, targets=None, name: str = "toy") -> LabelMatrix:
    votes = np.asarray(rows, dtype=np.int16).reshape(len(rows), -1 if rows and len(rows[0]) else 0)
    if votes.ndim != 2:
        votes = votes.reshape(len(rows), 0)
    m = votes.shape[1]
    return LabelMatrix(
        doc_ids=tuple(f"d{i}" for i in range(len(rows))),
        lf_names=tuple(f"lf{j}" for j in range(m)),
        votes=votes,
        schema=toy_schema(k, mode, name),
        lf_targets=tuple(targets) if targets is not None else None,
    )


def doc(title: str = "", text: str = "", tags: str | None = None, doc_id: str = "d0") -> Document:
    return Document(id=doc_id, title=title, text=text, tags=tags)


def synthetic_votes(rng: np.random.Generator, n: int, m: int, k: int, coverage: float, accs, prior):
    """Conditionally independent voters with known per-rule accuracy.

    Each rule fires with probability `coverage`; when it fires it votes the
    true class with its accuracy, otherwise uniformly among the wrong classes.
    Returns (votes, true_y).
    """
    prior = np.asarray(prior, dtype=np.float64)
    y = rng.choice(k, size=n, p=prior / prior.sum())
    votes = np.full((n, m), -1, dtype=np.int16)
    for j in range(m):
        fires = rng.random(n) < coverage
        correct = rng.random(n) < accs[j]
        offset = rng.integers(1, k, size=n)
        voted = np.where(correct, y, (y + offset) % k)
        votes[fires, j] = voted[fires]
    return votes, y


def matrix_from_votes(votes: np.ndarray, k: int) -> LabelMatrix:
    return LabelMatrix(
        doc_ids=tuple(f"d{i}" for i in range(votes.shape[0])),
        lf_names=tuple(f"lf{j}" for j in range(votes.shape[1])),
        votes=votes.astype(np.int16),
        schema=toy_schema(k),
    )


RAW_ARTICLES = [
    (
        "a01",
        "Konflik lahan meluas di pesisir timur",
        "Warga desa menolak perluasan tambang emas milik PT Mineral Jaya. Sengketa "
        "lahan memicu konflik berkepanjangan antara warga dusun dan perusahaan. "
        "Banjir musiman memperparah kerugian petani setempat.",
    ),
    (
        "a02",
        "Inovasi budidaya mangrove menjanjikan",
        "Peneliti mengembangkan inovasi budidaya mangrove di pesisir utara. "
        "Penelitian ini melibatkan masyarakat desa dan sekolah lapangan.",
    ),
    (
        "a03",
        "Kebakaran hutan melanda kawasan gambut",
        "Kebakaran hutan dan lahan gambut meluas sejak pekan lalu. Asap tebal "
        "mengganggu warga dan satwa liar. Pemerintah daerah menetapkan status "
        "tanggap darurat bencana.",
    ),
    (
        "a04",
        "Dugaan korupsi izin tambang diselidiki",
        "Aparat menyelidiki dugaan korupsi dalam penerbitan izin tambang batubara. "
        "Suap diduga mengalir ke sejumlah pejabat. Kasus ini mencuat setelah "
        "laporan masyarakat sipil.",
    ),
    (
        "a05",
        "Penyu hijau kembali bertelur di pantai selatan",
        "Relawan mencatat kenaikan jumlah penyu hijau yang bertelur tahun ini. "
        "Upaya konservasi pesisir mulai menunjukkan hasil.",
    ),
    (
        "a06",
        "Harga pangan stabil jelang musim panen",
        "Pasokan beras dan jagung mencukupi kebutuhan pasar. Petani berharap "
        "cuaca tetap mendukung sampai panen raya.",
    ),
    (
        "a07",
        "Sampah plastik mencemari muara sungai",
        "Timbunan sampah plastik menumpuk di muara sungai besar. Komunitas "
        "peduli lingkungan menggelar aksi bersih pantai setiap akhir pekan.",
    ),
    (
        "a08",
        "Krisis air bersih mengancam kota pesisir",
        "Kekeringan panjang memicu krisis air bersih. Warga antre berjam-jam "
        "untuk mendapat jatah air dari tangki pemerintah.",
    ),
    (
        "a09",
        "Masyarakat adat menjaga hutan larangan",
        "Masyarakat adat mempertahankan hutan larangan dari perambahan. Mereka "
        "menolak kehadiran perusahaan sawit di wilayah adat.",
    ),
    (
        "a10",
        "Vaksinasi satwa dilindungi digencarkan",
        "Dokter hewan memvaksinasi satwa dilindungi di pusat rehabilitasi. "
        "Program ini mencegah wabah penyakit menular antar satwa.",
    ),
    (
        "a11",
        "Burung migran singgah di danau purba",
        "Ribuan burung migran singgah di danau purba setiap musim dingin. "
        "Pengamat burung mencatat tiga jenis baru tahun ini.",
    ),
    (
        "a12",
        "Energi terbarukan tumbuh di desa terpencil",
        "Pembangkit mikrohidro menerangi desa terpencil di kaki gunung. Warga "
        "mengelola turbin secara swadaya dengan pendampingan LSM lokal.",
    ),
    (
        "a13",
        "Banjir bandang putus akses tiga kecamatan",
        "Banjir bandang menerjang permukiman di bantaran sungai. Longsor "
        "menutup jalan utama dan memutus akses tiga kecamatan. Tim penyelamat "
        "mengevakuasi warga yang terjebak. Bantuan logistik mulai berdatangan "
        "dari kabupaten tetangga. Sekolah diliburkan sampai air surut. Petugas "
        "mendata kerusakan rumah dan sawah. Cuaca ekstrem diperkirakan masih "
        "berlanjut hingga akhir pekan. Posko pengungsian didirikan di balai "
        "desa. Relawan membagikan makanan dan selimut. Anak-anak mengikuti "
        "kegiatan trauma healing di tenda darurat.",
    ),
    (
        "a14",
        "Sawit rakyat menunggu kepastian harga",
        "Petani sawit mengeluhkan harga tandan buah segar yang turun. Koperasi "
        "mendesak pabrik menepati kontrak pembelian.",
    ),
    (
        "a15",
        "Foto udara ungkap kerusakan terumbu karang",
        "Foto udara memperlihatkan kerusakan terumbu karang akibat jangkar "
        "kapal. Peneliti kelautan menyiapkan zona tambat apung.",
    ),
    (
        "a16",
        "Pemerintah kaji ulang izin perusahaan kayu",
        "Kementerian mengkaji ulang izin konsesi perusahaan kayu setelah "
        "temuan pelanggaran. PT Rimba Lestari membantah menebang di luar blok.",
    ),
]


def write_raw_corpus(path) -> int:
    """Write the synthetic article fixture as a raw JSONL file; returns the count."""
    import json

    lines = [
        json.dumps({"id": article_id, "title": title, "body": body}, ensure_ascii=False)
        for article_id, title, body in RAW_ARTICLES
    ]
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    return len(RAW_ARTICLES)


def estimated_accuracies(params, votes: np.ndarray) -> np.ndarray:
    """Read per-rule conditional accuracies P(vote = y | Y = y, voted) off fitted params.

    The joint parameter for the correct vote is prior[y] * coverage * accuracy,
    so dividing by prior and empirical coverage isolates the accuracy; average
    over true classes.
    """
    k = params.prior.k
    p = params.prior.p
    coverage = (votes != -1).mean(axis=0)
    out = []
    for jj, j in enumerate(params.kept):
        vals = [params.mu[jj * k + y, y] / (p[y] * coverage[j]) for y in range(k)]
        out.append(float(np.mean(vals)))
    return np.asarray(out)
