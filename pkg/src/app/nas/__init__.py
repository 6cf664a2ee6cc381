"""탐색 공간, 공유 가중치 슈퍼넷, 컨트롤러"""
from .searchspace import (
    ArchChoice, Decision, DecisionSchema, StrideRule, TaskStats,
    build_schema, describe_choice, max_architecture, patch_d_candidates, patch_hw_candidates,
    restrict_strides, validate_choice,
)
from .supernet import (
    ArchRealization, SupernetConfig, SupernetWeights,
    active_param_ids, build, forward, matching_op, realize,
)
from .controller import (
    ControllerState, Rollout, create_state, greedy, greedy_rollout, reinforce_update, sample,
)

__all__ = [
    'ArchChoice', 'Decision', 'DecisionSchema', 'StrideRule', 'TaskStats',
    'build_schema', 'describe_choice', 'max_architecture', 'patch_d_candidates', 'patch_hw_candidates',
    'restrict_strides', 'validate_choice',
    'ArchRealization', 'SupernetConfig', 'SupernetWeights',
    'active_param_ids', 'build', 'forward', 'matching_op', 'realize',
    'ControllerState', 'Rollout', 'create_state', 'greedy', 'greedy_rollout', 'reinforce_update', 'sample',
]
