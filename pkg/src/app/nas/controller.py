"""
LSTM 컨트롤러 (REINFORCE + 이동평균 baseline + 엔트로피 정규화)

결정 스키마의 결정마다 한 스텝씩 진행합니다.
스텝 입력은 "이전 행동 임베딩 + 스텝 고유 오프셋"이며 첫 스텝은 학습되는 시작 토큰을 씁니다.
역전파는 numpy로 직접 계산합니다 (BPTT).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from autodiff.optim import AdamState, adam_step
from core.responses import ArgumentException, ValidationException
from nas.searchspace import ArchChoice, DecisionSchema, validate_choice

logger = logging.getLogger(__name__)

HIDDEN_SIZE = 64
EMBED_SIZE = 32
BASELINE_DECAY = 0.95
INIT_RANGE = 0.1


@dataclass
class ControllerState:
    """컨트롤러 파라미터, baseline, 옵티마이저 상태"""
    sizes: Tuple[int, ...]
    params: Dict[str, np.ndarray]
    adam: AdamState
    entropy_coef: float = 1e-4
    baseline: Optional[float] = None
    baseline_decay: float = BASELINE_DECAY
    hidden_size: int = HIDDEN_SIZE
    embed_size: int = EMBED_SIZE
    updates: int = 0

    def __post_init__(self) -> None:
        if self.entropy_coef < 0:
            raise ArgumentException(f"엔트로피 계수는 0 이상이어야 합니다: {self.entropy_coef}")
        if not 0.0 <= self.baseline_decay < 1.0:
            raise ArgumentException(f"baseline decay는 [0, 1) 범위여야 합니다: {self.baseline_decay}")
        for t, k in enumerate(self.sizes):
            if self.params[f"head.{t}.weight"].shape[0] != k:
                raise ValidationException(f"head.{t} 폭이 선택지 수({k})와 다릅니다")

    @property
    def steps(self) -> int:
        return len(self.sizes)

    def check_schema(self, schema: DecisionSchema) -> None:
        if tuple(schema.sizes) != self.sizes:
            raise ValidationException(
                f"컨트롤러 head 폭 {list(self.sizes)}이 스키마 {schema.sizes}와 다릅니다"
            )

    def copy_params(self) -> Dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def to_arrays(self, prefix: str = "controller") -> Dict[str, np.ndarray]:
        arrays = {f"{prefix}.param.{k}": v for k, v in self.params.items()}
        arrays.update(self.adam.to_arrays(f"{prefix}.adam"))
        return arrays

    def meta(self) -> Dict[str, object]:
        return {
            "sizes": list(self.sizes),
            "entropy_coef": self.entropy_coef,
            "baseline": self.baseline,
            "baseline_decay": self.baseline_decay,
            "hidden_size": self.hidden_size,
            "embed_size": self.embed_size,
            "updates": self.updates,
            "param_names": sorted(self.params),
            "adam": self.adam.meta(),
        }

    @classmethod
    def restore(
        cls, meta: Mapping[str, object], arrays: Mapping[str, np.ndarray], prefix: str = "controller"
    ) -> "ControllerState":
        params = {
            name: np.array(arrays[f"{prefix}.param.{name}"], dtype=np.float64, copy=True)
            for name in meta["param_names"]  # type: ignore[union-attr]
        }
        baseline = meta["baseline"]
        return cls(
            sizes=tuple(int(k) for k in meta["sizes"]),  # type: ignore[union-attr]
            params=params,
            adam=AdamState.restore(meta["adam"], arrays, f"{prefix}.adam"),  # type: ignore[arg-type]
            entropy_coef=float(meta["entropy_coef"]),
            baseline=None if baseline is None else float(baseline),
            baseline_decay=float(meta["baseline_decay"]),
            hidden_size=int(meta["hidden_size"]),
            embed_size=int(meta["embed_size"]),
            updates=int(meta["updates"]),
        )


@dataclass(frozen=True)
class Rollout:
    """샘플링된 행동 시퀀스와 스텝별 log 확률/엔트로피"""
    actions: ArchChoice
    log_probs: Tuple[float, ...]
    entropies: Tuple[float, ...]

    @property
    def total_log_prob(self) -> float:
        return float(sum(self.log_probs))

    @property
    def mean_entropy(self) -> float:
        return float(np.mean(self.entropies)) if self.entropies else 0.0


@dataclass
class UpdateStats:
    mean_reward: float
    mean_entropy: float
    loss: float
    baseline: float
    grad_norm: float
    extra: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, float]:
        return {
            "mean_reward": self.mean_reward,
            "mean_entropy": self.mean_entropy,
            "loss": self.loss,
            "baseline": self.baseline,
            "grad_norm": self.grad_norm,
            **self.extra,
        }


def create_state(
    schema: DecisionSchema,
    seed: int = 0,
    lr: float = 1e-3,
    weight_decay: float = 1e-6,
    entropy_coef: float = 1e-4,
    hidden_size: int = HIDDEN_SIZE,
    embed_size: int = EMBED_SIZE,
    baseline_decay: float = BASELINE_DECAY,
) -> ControllerState:
    """uniform(±0.1) 초기화, 출력 head만 0으로 시작 (초기 정책은 균등 분포)"""
    rng = np.random.default_rng(seed)
    sizes = tuple(schema.sizes)

    def uniform(*shape: int) -> np.ndarray:
        return rng.uniform(-INIT_RANGE, INIT_RANGE, size=shape)

    params: Dict[str, np.ndarray] = {
        "start": uniform(embed_size),
        "offset": uniform(len(sizes), embed_size),
        "lstm.weight": uniform(4 * hidden_size, embed_size + hidden_size),
        "lstm.bias": np.zeros(4 * hidden_size),
    }
    for t, k in enumerate(sizes):
        params[f"embed.{t}"] = uniform(k, embed_size)
        params[f"head.{t}.weight"] = np.zeros((k, hidden_size))
        params[f"head.{t}.bias"] = np.zeros(k)
    return ControllerState(
        sizes=sizes,
        params=params,
        adam=AdamState(lr=lr, weight_decay=weight_decay),
        entropy_coef=entropy_coef,
        baseline_decay=baseline_decay,
        hidden_size=hidden_size,
        embed_size=embed_size,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _entropy(log_p: np.ndarray) -> np.ndarray:
    return -(np.exp(log_p) * log_p).sum(axis=-1)


class _Unroll:
    """배치 단위 순전파 (역전파용 중간값 보관)"""

    def __init__(self, state: ControllerState, batch: int):
        self.state = state
        self.batch = batch
        H = state.hidden_size
        self.h = np.zeros((batch, H))
        self.c = np.zeros((batch, H))
        self.cache: List[Dict[str, np.ndarray]] = []

    def step_input(self, t: int, prev_actions: Optional[np.ndarray]) -> np.ndarray:
        p = self.state.params
        if t == 0:
            base = np.broadcast_to(p["start"], (self.batch, self.state.embed_size))
        else:
            base = p[f"embed.{t - 1}"][prev_actions]
        return base + p["offset"][t]

    def step(self, t: int, prev_actions: Optional[np.ndarray]) -> np.ndarray:
        """한 스텝 진행 후 log 확률 (batch, k_t) 반환"""
        p = self.state.params
        H = self.state.hidden_size
        x = self.step_input(t, prev_actions)
        xh = np.concatenate([x, self.h], axis=1)
        z = xh @ p["lstm.weight"].T + p["lstm.bias"]
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = _sigmoid(z[:, 3 * H:])
        c_prev = self.c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        logits = h @ p[f"head.{t}.weight"].T + p[f"head.{t}.bias"]
        log_p = _log_softmax(logits)
        self.cache.append({
            "xh": xh, "i": i, "f": f, "g": g, "o": o, "c_prev": c_prev, "tanh_c": tanh_c, "h": h,
            "log_p": log_p,
        })
        self.h, self.c = h, c
        return log_p


def _categorical(log_p: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(np.exp(log_p))
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), log_p.size - 1))


def _rollout_from(choice: List[int], log_ps: List[np.ndarray]) -> Rollout:
    log_probs = tuple(min(float(lp[a]), 0.0) for a, lp in zip(choice, log_ps))
    entropies = tuple(
        float(np.clip(_entropy(lp), 0.0, np.log(lp.size))) for lp in log_ps
    )
    return Rollout(actions=ArchChoice(tuple(choice)), log_probs=log_probs, entropies=entropies)


def sample(state: ControllerState, schema: DecisionSchema, rng: np.random.Generator) -> Rollout:
    """정책에서 아키텍처 하나를 샘플링 (상태는 읽기만 함)"""
    state.check_schema(schema)
    unroll = _Unroll(state, 1)
    actions: List[int] = []
    log_ps: List[np.ndarray] = []
    prev = None
    for t in range(state.steps):
        log_p = unroll.step(t, prev)[0]
        a = _categorical(log_p, rng)
        actions.append(a)
        log_ps.append(log_p)
        prev = np.array([a])
    return _rollout_from(actions, log_ps)


def greedy_rollout(state: ControllerState, schema: DecisionSchema) -> Rollout:
    """스텝마다 argmax (동률이면 가장 작은 인덱스)"""
    state.check_schema(schema)
    unroll = _Unroll(state, 1)
    actions: List[int] = []
    log_ps: List[np.ndarray] = []
    prev = None
    for t in range(state.steps):
        log_p = unroll.step(t, prev)[0]
        a = int(np.argmax(log_p))
        actions.append(a)
        log_ps.append(log_p)
        prev = np.array([a])
    return _rollout_from(actions, log_ps)


def greedy(state: ControllerState, schema: DecisionSchema) -> ArchChoice:
    return greedy_rollout(state, schema).actions


def evaluate_actions(
    state: ControllerState, schema: DecisionSchema, choices: Sequence[ArchChoice]
) -> Tuple[np.ndarray, np.ndarray]:
    """주어진 행동 시퀀스의 스텝별 log 확률과 엔트로피 (N, T)"""
    state.check_schema(schema)
    for choice in choices:
        validate_choice(schema, choice)
    actions = np.array([c.indices for c in choices], dtype=np.int64)
    unroll = _Unroll(state, len(choices))
    log_probs = np.zeros(actions.shape)
    entropies = np.zeros(actions.shape)
    for t in range(state.steps):
        log_p = unroll.step(t, actions[:, t - 1] if t > 0 else None)
        log_probs[:, t] = log_p[np.arange(len(choices)), actions[:, t]]
        entropies[:, t] = _entropy(log_p)
    return log_probs, entropies


def reinforce_update(
    state: ControllerState,
    schema: DecisionSchema,
    rollouts: Sequence[Rollout],
    rewards: Sequence[float],
) -> UpdateStats:
    """loss = mean[ -(R - b) * sum log pi - beta * sum H ] 에 대해 Adam 한 스텝, 이후 baseline 갱신"""
    if not rollouts:
        raise ArgumentException("rollout 목록이 비어 있습니다")
    if len(rollouts) != len(rewards):
        raise ArgumentException(f"rollout 수({len(rollouts)})와 보상 수({len(rewards)})가 다릅니다")
    reward_arr = np.asarray(rewards, dtype=np.float64)
    if not np.all(np.isfinite(reward_arr)) or reward_arr.min() < 0.0 or reward_arr.max() > 1.0:
        raise ArgumentException(f"보상은 [0, 1] 범위의 유한한 값이어야 합니다: {list(rewards)}")
    state.check_schema(schema)

    N = len(rollouts)
    H = state.hidden_size
    beta = state.entropy_coef
    mean_reward = float(reward_arr.mean())
    baseline = mean_reward if state.baseline is None else state.baseline
    advantage = reward_arr - baseline

    actions = np.array([r.actions.indices for r in rollouts], dtype=np.int64)
    unroll = _Unroll(state, N)
    rows = np.arange(N)
    log_probs = np.zeros((N, state.steps))
    entropies = np.zeros((N, state.steps))
    for t in range(state.steps):
        log_p = unroll.step(t, actions[:, t - 1] if t > 0 else None)
        log_probs[:, t] = log_p[rows, actions[:, t]]
        entropies[:, t] = _entropy(log_p)
    loss = float(np.mean(-advantage * log_probs.sum(axis=1) - beta * entropies.sum(axis=1)))

    p = state.params
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    dh_next = np.zeros((N, H))
    dc_next = np.zeros((N, H))
    W = p["lstm.weight"]
    E = state.embed_size
    for t in reversed(range(state.steps)):
        cache = unroll.cache[t]
        log_p = cache["log_p"]
        prob = np.exp(log_p)
        onehot = np.zeros_like(prob)
        onehot[rows, actions[:, t]] = 1.0
        # d(-A log pi)/dz = -A (onehot - p),  d(-beta H)/dz = beta p (log p + H)
        dlogits = (
            -advantage[:, None] * (onehot - prob)
            + beta * prob * (log_p + entropies[:, t][:, None])
        ) / N
        grads[f"head.{t}.weight"] += dlogits.T @ cache["h"]
        grads[f"head.{t}.bias"] += dlogits.sum(axis=0)

        dh = dlogits @ p[f"head.{t}.weight"] + dh_next
        i, f, g, o = cache["i"], cache["f"], cache["g"], cache["o"]
        tanh_c = cache["tanh_c"]
        dc = dh * o * (1.0 - tanh_c ** 2) + dc_next
        dz = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * cache["c_prev"] * f * (1.0 - f),
            dc * i * (1.0 - g ** 2),
            dh * tanh_c * o * (1.0 - o),
        ], axis=1)
        grads["lstm.weight"] += dz.T @ cache["xh"]
        grads["lstm.bias"] += dz.sum(axis=0)
        dxh = dz @ W
        dx = dxh[:, :E]
        dh_next = dxh[:, E:]
        dc_next = dc * f

        grads["offset"][t] += dx.sum(axis=0)
        if t == 0:
            grads["start"] += dx.sum(axis=0)
        else:
            np.add.at(grads[f"embed.{t - 1}"], actions[:, t - 1], dx)

    grad_norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    adam_step(p, grads, state.adam)
    state.baseline = state.baseline_decay * baseline + (1.0 - state.baseline_decay) * mean_reward
    state.updates += 1

    stats = UpdateStats(
        mean_reward=mean_reward,
        mean_entropy=float(entropies.mean()),
        loss=loss,
        baseline=state.baseline,
        grad_norm=grad_norm,
    )
    logger.debug(
        "controller update=%d mean_reward=%.4f entropy=%.4f loss=%.5f baseline=%.4f",
        state.updates, stats.mean_reward, stats.mean_entropy, stats.loss, stats.baseline,
    )
    return stats


def policy_entropy(state: ControllerState, schema: DecisionSchema) -> float:
    """greedy 경로를 따라간 스텝별 엔트로피 평균"""
    return greedy_rollout(state, schema).mean_entropy
