"""Deterministic deep Q-learning training and evaluation harness."""

from detrl._core import (  # noqa: F401
    Action,
    AgentRunConfig,
    CatchEnv,
    CatchState,
    ComputeKind,
    EnvConfig,
    EvalSuite,
    Hyperparams,
    QNetwork,
    RandomStream,
    SeedSpec,
    StepResult,
    __version__,
    cmd_gen_suite,
    cmd_report,
    cmd_train,
    cmd_verify,
    compare_runs,
    config_fingerprint,
    derive_seed,
    epsilon_at,
    evaluate,
    feature_length,
    featurize,
    init_network,
    load_network,
    load_suite,
    make_start_state_suite,
    make_sticky_suite,
    new_stream,
    rel_std,
    save_network,
    save_suite,
    state_digest,
    train_run,
    variance_test,
)
