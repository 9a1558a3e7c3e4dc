"""Slow scalar-loop reference computations the vectorised code is checked against."""

import math
from typing import List

import numpy as np

from sla_lab.domain.model import BackboneKind, SlaModel
from sla_lab.domain.transforms import TransformationSet, apply


def embed_loop(model: SlaModel, image: np.ndarray) -> List[float]:
    h = [float(v) for v in image.reshape(-1)]
    for w, b in model.backbone.layers:
        wd, bd = w.tensor.data, b.tensor.data
        h = [sum(wd[r, c] * h[c] for c in range(len(h))) + bd[r] for r in range(wd.shape[0])]
        if model.backbone.kind == BackboneKind.MLP:
            h = [max(0.0, v) for v in h]
    return h


def dot(row: np.ndarray, z: List[float]) -> float:
    return sum(float(row[d]) * z[d] for d in range(len(z)))


def log_softmax_loop(values: List[float]) -> List[float]:
    top = max(values)
    lse = top + math.log(sum(math.exp(v - top) for v in values))
    return [v - lse for v in values]


def ce_loop(values: List[float], label: int) -> float:
    return -log_softmax_loop(values)[label]


def da_loss(model: SlaModel, images: np.ndarray, labels: np.ndarray, tset: TransformationSet) -> float:
    u = model.u.tensor.data
    total = 0.0
    for t in tset:
        for x, y in zip(images, labels):
            z = embed_loop(model, apply(t, x))
            total += ce_loop([dot(u[i], z) for i in range(model.n_classes)], int(y))
    return total / (tset.size * len(labels))


def mt_loss(model: SlaModel, images: np.ndarray, labels: np.ndarray, tset: TransformationSet) -> float:
    u, v = model.u.tensor.data, model.v.tensor.data
    total = 0.0
    for j, t in enumerate(tset):
        for x, y in zip(images, labels):
            z = embed_loop(model, apply(t, x))
            total += ce_loop([dot(u[i], z) for i in range(model.n_classes)], int(y))
            total += ce_loop([dot(v[k], z) for k in range(tset.size)], j)
    return total / (tset.size * len(labels))


def sla_loss(model: SlaModel, images: np.ndarray, labels: np.ndarray, tset: TransformationSet) -> float:
    w, m = model.joint.w.tensor.data, tset.size
    total = 0.0
    for j, t in enumerate(tset):
        for x, y in zip(images, labels):
            z = embed_loop(model, apply(t, x))
            logits = [dot(w[r], z) for r in range(model.n_classes * m)]
            total += ce_loop(logits, int(y) * m + j)
    return total / (m * len(labels))


def aggregated(model: SlaModel, image: np.ndarray, tset: TransformationSet) -> List[float]:
    w, m = model.joint.w.tensor.data, tset.size
    views = [embed_loop(model, apply(t, image)) for t in tset]
    return [sum(dot(w[i * m + j], views[j]) for j in range(m)) / m for i in range(model.n_classes)]


def sla_sd_loss(model: SlaModel, images: np.ndarray, labels: np.ndarray, tset: TransformationSet, beta: int) -> float:
    u = model.u.tensor.data
    kl = ce = 0.0
    for x, y in zip(images, labels):
        teacher = [math.exp(v) for v in log_softmax_loop(aggregated(model, x, tset))]
        z = embed_loop(model, x)
        student = log_softmax_loop([dot(u[i], z) for i in range(model.n_classes)])
        kl += sum(p * (math.log(p) - s) for p, s in zip(teacher, student) if p > 0)
        ce += -student[int(y)]
    b = len(labels)
    return sla_loss(model, images, labels, tset) + kl / b + beta * ce / b
