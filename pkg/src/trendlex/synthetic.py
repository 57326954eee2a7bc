"""Deterministic synthetic corpora shaped like a three-venue harvest.

Topic sentences use surface forms the starter lexicon recognises, and topic
probabilities drift by year so trends are visible. Nothing here is real data.
"""
from __future__ import annotations

import itertools
import json
import random
from typing import Iterator

from .records import PaperRecord

# Retained per (venue, year) in the reference harvest; 2022 rows are trend-only.
# Only the 2022 total (8,424) is known, so its split across venues is arbitrary.
PAPER_COUNTS = {
    ("cvpr", 2023): 2353, ("cvpr", 2024): 2713, ("cvpr", 2025): 2871,
    ("iclr", 2023): 4372, ("iclr", 2024): 2260, ("iclr", 2025): 3704,
    ("neurips", 2023): 3337, ("neurips", 2024): 4494,
}
TREND_ONLY_COUNTS = {("cvpr", 2022): 2064, ("iclr", 2022): 1094, ("neurips", 2022): 5266}

TOPICS: dict[str, list[str]] = {
    "Vision-Language/Multimodal/LLM": [
        "We build a vision-language model that answers open questions about a scene.",
        "Multimodal large language models are prompted to describe the visual input.",
        "Our LLM agent reads the picture and follows the user request step by step.",
    ],
    "Diffusion & Generative": [
        "A latent diffusion model generates samples from text prompts.",
        "We distill the diffusion sampler into a few-step generative network.",
    ],
    "NeRF/Gaussian Splatting": [
        "The scene is represented with 3D Gaussian splatting for real-time novel view synthesis.",
        "Neural radiance fields are fitted from sparse posed photographs.",
    ],
    "3D Geometry/Multiview/Reconstruction": [
        "Multi-view geometry constrains the 3D reconstruction of the object.",
        "Stereo cues recover accurate geometry under wide baselines.",
    ],
    "Point Cloud": ["Point clouds captured by LiDAR are encoded with a sparse backbone."],
    "Mesh/Surface": ["A watertight mesh is extracted from the signed distance function."],
    "3D Detection/Segmentation": ["We study 3D object detection in indoor rooms."],
    "2D Segmentation": ["Semantic segmentation masks are refined at object boundaries."],
    "2D Object Detection": ["The detector localizes small objects with a transformer head."],
    "Video Understanding": ["Action recognition in long videos requires temporal context."],
    "Tracking/Flow/Re-ID": ["Multi-object tracking links detections using optical flow."],
    "Pose/Face/Body": ["Human pose estimation recovers hands and body joints from monocular input."],
    "Open-Vocabulary/Grounding": ["Open-vocabulary recognition transfers zero-shot to unseen classes."],
    "Self-Supervised/Pretraining": ["Self-supervised pretraining with masked autoencoders yields transferable features."],
    "Meta-Learning/AutoML": ["Neural architecture search discovers a compact cell through meta-learning."],
    "Weak/Semi/Few-Shot": ["Semi-supervised training copes with noisy labels in the few-shot regime."],
    "GNN": ["A graph neural network performs message passing over molecular graphs."],
    "Causality/Treatment Effect": ["We estimate treatment effects with a causal inference estimator."],
    "Optimization/Theory": ["We prove a convergence rate for stochastic gradient descent under weak assumptions."],
    "Efficiency/Compression": ["Quantization and pruning cut latency on edge hardware."],
    "Robustness/OOD": ["Robustness to distribution shifts and adversarial attacks is evaluated."],
    "Uncertainty/Safety": ["Calibration of uncertainty estimates improves safety in deployment."],
    "Privacy/Watermark/Fairness": ["Differential privacy and fairness constraints protect individuals."],
    "Interpretability": ["Saliency explanations make the classifier interpretable."],
    "Federated/Distributed": ["Federated learning trains across decentralized clients."],
    "Medical/Biological Imaging": ["Clinical MRI scans are segmented for medical diagnosis."],
    "Scene Graph/HOI/Affordance": ["Scene graphs capture human-object interaction and affordances."],
    "Restoration/Super-Resolution": ["Super-resolution and denoising restore degraded photographs."],
    "Autonomous Driving": ["Autonomous driving stacks fuse camera and radar in bird's-eye view."],
    "Remote Sensing": ["Satellite and aerial imagery are used for land-cover mapping."],
    "Time-Series/Sequential/SSM": ["State space models forecast long time series efficiently."],
    "Active Learning/Data Selection": ["Active learning with coresets reduces annotation cost."],
    "Bayesian/Probabilistic": ["Variational inference approximates the Bayesian posterior."],
    "Reinforcement Learning": ["Reinforcement learning agents optimize a sparse reward."],
    "Image/Video Editing": ["Text-guided editing and inpainting preserve identity."],
}

VLM_DETAILS = [
    "The LLaVA baseline is extended with LoRA adapters.",
    "We apply visual instruction tuning on synthetic dialogues.",
    "A Q-Former bridge connects the frozen encoder to the language decoder.",
    "Cross-attention layers fuse visual tokens into the decoder.",
    "Grounding and referring expressions are evaluated on RefCOCO.",
    "Contrastive pretraining on LAION aligns both towers.",
    "Captioning quality is measured on MS-COCO and Flickr30k.",
    "Chain-of-thought reasoning improves VQA accuracy.",
    "Audio and speech streams are added as extra modalities.",
    "Point clouds are paired with text for 3D question answering.",
]

FILLER = [
    "Experiments on standard benchmarks confirm the benefits of the design.",
    "The approach is simple to implement and scales to large datasets.",
    "We analyse failure cases and discuss limitations in detail.",
    "Ablations isolate the contribution of each component.",
    "Code and trained weights are publicly released.",
    "Results hold across several backbones and training budgets.",
    "The formulation admits a closed-form update at every iteration.",
    "We further compare against strong baselines under matched compute.",
]

# Per-year multipliers on a topic's base rate, so VLM and diffusion rise.
DRIFT = {
    "Vision-Language/Multimodal/LLM": {2022: 0.5, 2023: 1.0, 2024: 1.9, 2025: 2.6},
    "Diffusion & Generative": {2022: 0.6, 2023: 1.0, 2024: 1.4, 2025: 1.7},
    "Self-Supervised/Pretraining": {2022: 1.3, 2023: 1.0, 2024: 0.8, 2025: 0.7},
}
BASE_RATE = 0.08
VLM_BASE_RATE = 0.16


def _rate(topic: str, year: int) -> float:
    base = VLM_BASE_RATE if topic.startswith("Vision-Language") else BASE_RATE
    return min(0.95, base * DRIFT.get(topic, {}).get(year, 1.0))


def synthetic_abstract(rng: random.Random, year: int, target_chars: int = 600) -> tuple[str, str]:
    topics = [t for t in TOPICS if rng.random() < _rate(t, year)]
    if not topics:
        topics = [rng.choice(sorted(TOPICS))]
    sentences = [rng.choice(TOPICS[t]) for t in topics]
    if "Vision-Language/Multimodal/LLM" in topics:
        sentences.extend(rng.sample(VLM_DETAILS, k=rng.randint(1, 3)))
    while sum(len(s) + 1 for s in sentences) < target_chars:
        sentences.append(rng.choice(FILLER))
    rng.shuffle(sentences)
    title = sentences[0].rstrip(".")
    return title, " ".join(sentences)


def generate(counts: dict[tuple[str, int], int], seed: int = 0, target_chars: int = 600,
             empty_every: int = 0, duplicate_every: int = 0) -> Iterator[dict]:
    """Yield raw record dicts. ``empty_every``/``duplicate_every`` inject noise rows."""
    rng = random.Random(seed)
    n = 0
    for (venue, year), count in sorted(counts.items()):
        for i in range(count):
            title, abstract = synthetic_abstract(rng, year, target_chars)
            n += 1
            rec = {"id": f"{venue}-{year}-{i:05d}", "venue": venue, "year": year,
                   "title": f"{title} ({venue} {year} #{i})", "abstract": abstract}
            yield rec
            if empty_every and n % empty_every == 0:
                yield {"id": f"{venue}-{year}-{i:05d}-empty", "venue": venue, "year": year,
                       "title": f"Withdrawn {venue} {year} #{i}", "abstract": "  "}
            if duplicate_every and n % duplicate_every == 0:
                yield {**rec, "id": rec["id"] + "-dup"}


def paper_shaped_counts(scale: float = 1.0, include_trend_only: bool = True) -> dict[tuple[str, int], int]:
    counts = dict(PAPER_COUNTS)
    if include_trend_only:
        counts.update(TREND_ONLY_COUNTS)
    return {k: max(1, round(v * scale)) for k, v in counts.items()}


def to_jsonl(rows) -> str:
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)


def benchmark_records(n: int, chars: int = 1500, seed: int = 1) -> list[PaperRecord]:
    """``n`` distinct abstract-length records (no noise rows) for timing runs."""
    rows = itertools.islice(generate(paper_shaped_counts(1.0, include_trend_only=False), seed=seed,
                                     target_chars=chars), n)
    return [PaperRecord(r["id"], r["venue"], r["year"], r["title"], r["abstract"]) for r in rows]
