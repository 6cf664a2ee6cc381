"""
탐색 엔진 서비스

에피소드 0: 최대 아키텍처로 공유 가중치 워밍업
에피소드 k ≥ 1:
  (a) 컨트롤러에서 rollout 샘플링
  (b) 공유 가중치로 검증 fold 평가 (학습 없음, 병렬 가능) → 보상
  (c) REINFORCE 갱신
  (d) greedy 아키텍처로 공유 가중치 학습
공유 가중치는 에피소드 0 이후 다시 초기화되지 않습니다.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from autodiff.optim import AdamState
from core.base_service import BaseService
from core.interfaces import (
    ICheckpointService, IChildTrainer, IDatasetHelper, IEvaluationService, ISearchService,
)
from core.resource_calculator import ResourceCalculator
from core.responses import ConfigException, NASException
from core.task_catalog import get_task_stats
from dataio.preprocessing import Case, fold_split, preprocess_case
from nas.controller import Rollout, create_state, greedy_rollout, reinforce_update, sample
from nas.searchspace import ArchChoice, DecisionSchema, TaskStats, build_schema, max_architecture, validate_choice
from nas.supernet import SupernetConfig, build, realize
from schemas import EpisodeLog, ExperimentConfig
from services.checkpoint_service import SearchState
from services.evaluation_service import DiceRewardEvaluator, SurrogateRewardEvaluator
from services.report_service import EpisodeReporter

logger = logging.getLogger(__name__)

RewardFn = Callable[[ArchChoice, Any], float]


@dataclass
class SearchData:
    """fold 분할 결과와 전처리된 케이스"""
    stats: TaskStats
    train_cases: List[Case]
    val_cases: List[Case]
    train_ids: List[str]
    val_ids: List[str]


@dataclass
class SearchResult:
    greedy: ArchChoice
    logs: List[EpisodeLog]
    checkpoint: Path
    state: SearchState
    reporter: EpisodeReporter


class SearchService(BaseService, ISearchService):
    """NAS 에피소드 루프"""

    def __init__(
        self,
        dataset_helper: IDatasetHelper,
        trainer: IChildTrainer,
        evaluation: IEvaluationService,
        checkpoints: ICheckpointService,
    ):
        super().__init__()
        self.dataset_helper = dataset_helper
        self.trainer = trainer
        self.evaluation = evaluation
        self.checkpoints = checkpoints

    # ------------------------------------------------------------------
    # 준비
    # ------------------------------------------------------------------
    def load_data(self, config: ExperimentConfig) -> Optional[SearchData]:
        """data_path가 있으면 fold 분할 후 학습 fold 통계와 케이스를 준비"""
        if not config.data_path:
            return None
        helper = self.dataset_helper.at(Path(config.data_path))
        train_ids, val_ids = fold_split(helper.case_ids(), config.fold_index, config.fold_count)
        stats = helper.task_stats(train_ids)
        need_cases = config.reward_mode == "dice"
        train_cases = [preprocess_case(c, config.crop_nonzero) for c in helper.load_cases(train_ids)] if need_cases else []
        val_cases = [preprocess_case(c, config.crop_nonzero) for c in helper.load_cases(val_ids)] if need_cases else []
        self.log_event(
            "data prepared", train=len(train_ids), validation=len(val_ids), fold=config.fold_index,
            median=(stats.median_d, stats.median_h, stats.median_w), minimum=(stats.min_d, stats.min_h, stats.min_w),
        )
        return SearchData(stats, train_cases, val_cases, train_ids, val_ids)

    def prepare(self, config: ExperimentConfig) -> Dict[str, Any]:
        data = self.load_data(config)
        if data is not None:
            stats = data.stats
        elif config.task_preset:
            stats = get_task_stats(config.task_preset)
        else:
            raise ConfigException("data_path 또는 task_preset이 필요합니다")
        return {"data": data, "schema": build_schema(stats)}

    def init_state(self, config: ExperimentConfig, schema: DecisionSchema) -> SearchState:
        stats = schema.stats
        weights = build(
            SupernetConfig(config.base_channels, stats.in_channels, stats.out_channels), schema, seed=config.seed
        )
        controller = create_state(
            schema,
            seed=config.seed,
            lr=config.controller_lr,
            weight_decay=config.controller_weight_decay,
            entropy_coef=config.entropy_coef,
            baseline_decay=config.baseline_decay,
        )
        return SearchState(
            config=config,
            schema=schema,
            weights=weights,
            child_adam=AdamState(lr=config.child_lr, weight_decay=config.child_weight_decay),
            controller=controller,
            rngs={
                "controller": np.random.default_rng([config.seed, 1]),
                "train": np.random.default_rng([config.seed, 2]),
            },
        )

    def reward_function(self, state: SearchState, data: Optional[SearchData]) -> RewardFn:
        config = state.config
        if config.reward_mode == "surrogate":
            if config.planted_indices is not None:
                planted = ArchChoice(tuple(config.planted_indices))
            else:
                planted = SurrogateRewardEvaluator.planted_from_seed(state.schema, config.seed)
            state.extra["planted"] = list(planted.indices)
            return SurrogateRewardEvaluator(state.schema, planted, config.surrogate_shaping)
        if data is None or not data.val_cases:
            raise ConfigException("dice 보상에는 검증 케이스가 필요합니다")
        return DiceRewardEvaluator(self.evaluation, state.weights, data.val_cases)

    # ------------------------------------------------------------------
    # 에피소드
    # ------------------------------------------------------------------
    def _train_child(self, state: SearchState, data: Optional[SearchData], choice: ArchChoice) -> Optional[float]:
        if data is None or not data.train_cases:
            return None
        config = state.config
        return self.trainer.train(
            state.weights,
            state.child_adam,
            realize(state.schema, choice),
            data.train_cases,
            epochs=config.child_epochs_per_episode,
            batch_size=config.batch_size,
            rng=state.rngs["train"],
            foreground_prob=config.foreground_prob,
        )

    def _score(self, state: SearchState, reward: RewardFn, rollouts: Sequence[Rollout]) -> List[float]:
        """rollout 순서대로 보상 수집"""
        schema = state.schema

        def score_one(rollout: Rollout) -> float:
            validate_choice(schema, rollout.actions)
            return float(reward(rollout.actions, realize(schema, rollout.actions)))

        workers = state.config.eval_workers
        if workers <= 1:
            return [score_one(r) for r in rollouts]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(score_one, rollouts))

    def _memory_mb(self, state: SearchState, choice: ArchChoice) -> float:
        return ResourceCalculator.estimate(state.weights, realize(state.schema, choice)).activation_mb

    def run_warmup(self, state: SearchState, data: Optional[SearchData], reward: RewardFn) -> EpisodeLog:
        """에피소드 0: 최대 패치 + 모든 skip 연결 아키텍처로 학습"""
        started = time.perf_counter()
        choice = max_architecture(state.schema)
        loss = self._train_child(state, data, choice)
        score = float(np.clip(reward(choice, realize(state.schema, choice)), 0.0, 1.0))
        probe = greedy_rollout(state.controller, state.schema)
        return EpisodeLog(
            episode=0,
            phase="warmup",
            rewards=[],
            mean_reward=score,
            max_reward=score,
            entropy=probe.mean_entropy,
            greedy=list(choice.indices),
            train_loss=loss,
            estimated_memory_mb=self._memory_mb(state, choice),
            duration_sec=time.perf_counter() - started,
        )

    def run_episode(self, state: SearchState, data: Optional[SearchData], reward: RewardFn) -> EpisodeLog:
        started = time.perf_counter()
        config = state.config
        rollouts = [
            sample(state.controller, state.schema, state.rngs["controller"])
            for _ in range(config.rollouts_per_episode)
        ]
        rewards = [float(np.clip(r, 0.0, 1.0)) for r in self._score(state, reward, rollouts)]
        stats = reinforce_update(state.controller, state.schema, rollouts, rewards)
        choice = greedy_rollout(state.controller, state.schema).actions
        loss = self._train_child(state, data, choice)
        return EpisodeLog(
            episode=state.episode,
            phase="search",
            rewards=rewards,
            mean_reward=stats.mean_reward,
            max_reward=max(rewards),
            entropy=float(np.mean([r.mean_entropy for r in rollouts])),
            greedy=list(choice.indices),
            train_loss=loss,
            estimated_memory_mb=self._memory_mb(state, choice),
            duration_sec=time.perf_counter() - started,
        )

    # ------------------------------------------------------------------
    # 실행
    # ------------------------------------------------------------------
    def resume_state(self, config: ExperimentConfig, resume: Path) -> SearchState:
        """체크포인트 상태를 이어받고 결과에 영향 없는 항목과 에피소드 수만 새 설정에서 가져옴"""
        state = self.checkpoints.load(resume)
        overrides = {
            "episodes": config.episodes,
            "eval_workers": config.eval_workers,
            "checkpoint_every": config.checkpoint_every,
            "checkpoint_name": config.checkpoint_name,
        }
        ignored = {
            k for k, v in config.model_dump().items()
            if k not in overrides and v != getattr(state.config, k)
        }
        if ignored:
            self.logger.warning(f"재개 시 체크포인트 설정을 유지합니다 (무시된 항목: {sorted(ignored)})")
        state.config = state.config.model_copy(update=overrides)
        return state

    def run_search(self, config: ExperimentConfig, out_dir: Path, resume: Optional[Path] = None) -> SearchResult:
        out_dir = Path(out_dir)
        if resume is not None:
            state = self.resume_state(config, resume)
            data = self.load_data(state.config)
        else:
            prepared = self.prepare(config)
            data = prepared["data"]
            state = self.init_state(config, prepared["schema"])
        config = state.config
        reward = self.reward_function(state, data)
        shared = state.weights.identity()

        reporter = EpisodeReporter(out_dir)
        reporter.reset(state.logs)
        self.log_event(
            "search start", episodes=config.episodes, rollouts=config.rollouts_per_episode,
            decisions=len(state.schema), architectures=state.schema.architecture_count(),
            reward_mode=config.reward_mode, resume_from=state.episode,
        )

        checkpoint_path = out_dir / config.checkpoint_name
        while state.episode <= config.episodes:
            log = self.run_warmup(state, data, reward) if state.episode == 0 else self.run_episode(state, data, reward)
            if state.weights.identity() != shared:
                raise NASException("공유 가중치가 다시 초기화되었습니다", "SHARED_WEIGHTS_REPLACED")
            state.logs.append(log)
            reporter.write(log)
            self.log_event(
                "episode", episode=log.episode, phase=log.phase, mean_reward=f"{log.mean_reward:.4f}",
                max_reward=f"{log.max_reward:.4f}", entropy=f"{log.entropy:.4f}",
                greedy="-".join(map(str, log.greedy)), duration=f"{log.duration_sec:.2f}s",
            )
            state.episode += 1
            if config.checkpoint_every and log.episode > 0 and log.episode % config.checkpoint_every == 0:
                self.checkpoints.save(state, out_dir / f"episode_{log.episode:04d}.ckpt.npz")

        self.checkpoints.save(state, checkpoint_path)
        final = ArchChoice(tuple(state.logs[-1].greedy))
        return SearchResult(greedy=final, logs=list(state.logs), checkpoint=checkpoint_path, state=state, reporter=reporter)
