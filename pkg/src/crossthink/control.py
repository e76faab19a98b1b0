"""Budget forcing and language forcing as a deterministic control loop.

Two intervention families:

* truncate — when the thinking stream hits the token cap before the model
  emits its end-of-thinking delimiter, close the stream, append the delimiter
  plus the answer trigger, and resume generation for the answer segment.
* extrapolate — when the model emits the delimiter while fewer than
  ``wait_count`` waits have been injected, suppress it, append the wait token,
  and continue thinking; afterwards the delimiter passes through.

Language forcing composes three independent knobs: a translated wait token,
a translated assistant-turn prefix, and a translated system message carrying
a think-only-in-this-language mandate. ``prefix`` and ``combined`` also apply
the translated wait, matching how the strategies build on each other; a bare
``system`` run leaves the wait token alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .assets import LanguageAssets
from .backend import (
    Backend,
    BackendUsage,
    InferenceRequest,
    Message,
    TokenStream,
)
from .errors import BackendError, ConfigurationError

MODES = ("truncate", "extrapolate")
STRATEGIES = ("none", "translated_wait", "prefix", "system", "combined")

# Strategies that replace the policy's wait token with the translation.
_WAIT_STRATEGIES = frozenset({"translated_wait", "prefix", "combined"})
_PREFIX_STRATEGIES = frozenset({"prefix", "combined"})
_SYSTEM_STRATEGIES = frozenset({"system", "combined"})


@dataclass(frozen=True)
class BudgetPolicy:
    mode: str
    max_thinking_tokens: int
    end_of_thinking_delimiter: str
    answer_trigger: str
    wait_token: str = "Wait"
    wait_count: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown budget mode {self.mode!r}")
        if self.max_thinking_tokens <= 0:
            raise ConfigurationError("max_thinking_tokens must be positive")
        if self.wait_count < 0:
            raise ConfigurationError("wait_count must be non-negative")
        if self.mode == "extrapolate" and self.wait_count < 1:
            raise ConfigurationError("extrapolate mode needs wait_count >= 1")
        if not self.end_of_thinking_delimiter:
            raise ConfigurationError("end_of_thinking_delimiter must be set")


@dataclass(frozen=True)
class ForcingPlan:
    strategy: str
    reasoning_language: str
    assets: LanguageAssets | None = None

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"unknown forcing strategy {self.strategy!r}")
        if self.strategy != "none":
            if self.assets is None:
                raise ConfigurationError(
                    f"strategy {self.strategy!r} needs language assets"
                )
            self.assets.entry(self.reasoning_language)


NO_FORCING = ForcingPlan(strategy="none", reasoning_language="en")


@dataclass
class GenerationRecord:
    request_id: str
    question_id: str
    query_language: str
    question_text: str
    strategy: str
    reasoning_language: str
    mode: str
    max_thinking_tokens: int
    wait_token: str
    wait_count: int
    seed_text: str = ""
    thinking_text: str = ""
    answer_text: str = ""
    thinking_token_count: int = 0
    answer_token_count: int = 0
    intervention_log: list[dict[str, int]] = field(default_factory=list)
    usage: BackendUsage = field(default_factory=BackendUsage)
    asset_hash: str = ""
    failed: bool = False
    failure_reason: str = ""

    @property
    def wait_injections(self) -> int:
        return sum(1 for i in self.intervention_log if "wait_injected_at" in i)

    @property
    def full_thinking(self) -> str:
        """Thinking segment including any forced prefix seed."""
        return self.seed_text + self.thinking_text

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["usage"] = vars(self.usage)
        d["intervention_log"] = list(self.intervention_log)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRecord":
        known = {f.name for f in fields(cls)}
        d = {k: v for k, v in d.items() if k in known}
        d["usage"] = BackendUsage(**d.get("usage", {}))
        d["intervention_log"] = list(d.get("intervention_log", []))
        return cls(**d)


def apply_forcing(policy: BudgetPolicy, plan: ForcingPlan) -> BudgetPolicy:
    """Return the policy with the wait token the strategy calls for."""
    plan.validate()
    if plan.strategy in _WAIT_STRATEGIES:
        assert plan.assets is not None
        wait = plan.assets.entry(plan.reasoning_language).wait_translation
        return replace(policy, wait_token=wait)
    return policy


def assemble_prompt(
    question: str,
    plan: ForcingPlan,
    base_system: str | None = None,
    model_id: str = "",
    request_id: str = "",
) -> InferenceRequest:
    """Pure string construction of the request for one forcing strategy."""
    if not question:
        raise ConfigurationError("question must be non-empty")
    plan.validate()
    messages: list[Message] = []
    if plan.strategy in _SYSTEM_STRATEGIES:
        assert plan.assets is not None
        template = plan.assets.entry(plan.reasoning_language).system_template
        messages.append(Message("system", template))
    elif base_system:
        messages.append(Message("system", base_system))
    messages.append(Message("user", question))
    if plan.strategy in _PREFIX_STRATEGIES:
        assert plan.assets is not None
        prefix = plan.assets.entry(plan.reasoning_language).prefix_translation
        messages.append(Message("assistant", prefix))
    return InferenceRequest(
        model_id=model_id, messages=tuple(messages), request_id=request_id
    )


@dataclass(frozen=True)
class Exemplar:
    question: str
    answer: str
    language: str


BASELINE_MODES = ("zero_shot", "en_cot_8shot", "native_cot_8shot")
_SHOT_COUNT = 8


def assemble_baseline_prompt(
    question: str,
    mode: str,
    exemplars: tuple[Exemplar, ...] = (),
    query_language: str = "en",
    model_id: str = "",
    request_id: str = "",
) -> InferenceRequest:
    """Non-reasoning baselines: zero-shot or fixed eight-shot CoT prompts."""
    if not question:
        raise ConfigurationError("question must be non-empty")
    if mode not in BASELINE_MODES:
        raise ConfigurationError(f"unknown baseline mode {mode!r}")
    if mode == "zero_shot":
        content = question
    else:
        wanted = "en" if mode == "en_cot_8shot" else query_language
        if len(exemplars) != _SHOT_COUNT:
            raise ConfigurationError(
                f"{mode} needs exactly {_SHOT_COUNT} exemplars, got {len(exemplars)}"
            )
        off = [e.language for e in exemplars if e.language != wanted]
        if off:
            raise ConfigurationError(
                f"{mode} needs exemplars in {wanted!r}, got {sorted(set(off))}"
            )
        blocks = [f"Question: {e.question}\nAnswer: {e.answer}" for e in exemplars]
        blocks.append(f"Question: {question}\nAnswer:")
        content = "\n\n".join(blocks)
    return InferenceRequest(
        model_id=model_id,
        messages=(Message("user", content),),
        request_id=request_id,
    )


class _DelimiterWatch:
    """Streaming detector for a delimiter that may span token boundaries."""

    def __init__(self, delimiter: str):
        self.delimiter = delimiter
        self._tail: list[str] = []
        self._tail_len = 0

    def feed(self, token_text: str) -> bool:
        """Record one token; True when the accumulated text now ends with
        the delimiter."""
        self._tail.append(token_text)
        self._tail_len += len(token_text)
        while self._tail and self._tail_len - len(self._tail[0]) >= len(self.delimiter):
            self._tail_len -= len(self._tail.pop(0))
        return "".join(self._tail).endswith(self.delimiter)


def _settle_delimiter(
    thinking: list[str], completing_token: str, delimiter: str
) -> int:
    """The delimiter just completed with ``completing_token`` (not yet in
    ``thinking``). Strip delimiter text from the tail of ``thinking``, keep
    any leading thinking text the completing token carried, and return the
    signed change in thinking-token count.

    A token counts as thinking iff it contributed at least one character
    outside the delimiter.
    """
    delta = 0
    extra = len(completing_token) - len(delimiter)
    if extra > 0:
        thinking.append(completing_token[:extra])
        delta += 1
    remaining = len(delimiter) - min(len(completing_token), len(delimiter))
    while remaining > 0 and thinking:
        last = thinking.pop()
        delta -= 1
        if len(last) <= remaining:
            remaining -= len(last)
        else:
            thinking.append(last[:-remaining])
            delta += 1
            remaining = 0
    return delta


def run_with_budget(
    request: InferenceRequest,
    policy: BudgetPolicy,
    backend: Backend,
    plan: ForcingPlan = NO_FORCING,
    question_id: str = "",
    query_language: str = "",
    question_text: str = "",
) -> GenerationRecord:
    """Drive one generation under a budget policy and a forcing plan.

    The wait-token override for the plan's strategy is applied here, so a
    caller never has to remember to combine ``apply_forcing`` by hand.
    """
    request.validate()
    policy = apply_forcing(policy, plan)
    policy.validate()

    record = GenerationRecord(
        request_id=request.request_id,
        question_id=question_id,
        query_language=query_language,
        question_text=question_text,
        strategy=plan.strategy,
        reasoning_language=plan.reasoning_language,
        mode=policy.mode,
        max_thinking_tokens=policy.max_thinking_tokens,
        wait_token=policy.wait_token,
        wait_count=policy.wait_count,
        asset_hash=plan.assets.source_hash if plan.assets else "",
    )

    delim = policy.end_of_thinking_delimiter
    seed = request.messages[-1].content if request.ends_with_assistant else ""
    record.seed_text = seed
    base = request.messages[:-1] if request.ends_with_assistant else request.messages

    thinking: list[str] = []
    answer: list[str] = []
    waits_used = 0

    def continuation(extra: str) -> InferenceRequest:
        content = seed + "".join(thinking) + extra
        return request.with_messages(base + (Message("assistant", content),))

    def consume_answer(stream: TokenStream, events=None) -> None:
        try:
            if events is not None:
                for ev in events:
                    if ev.token_text:
                        answer.append(ev.token_text)
                        record.answer_token_count += 1
            else:
                for ev in stream:
                    if ev.token_text:
                        answer.append(ev.token_text)
                        record.answer_token_count += 1
        finally:
            record.usage.add(stream.usage)

    cur = request
    while True:  # one iteration per thinking round
        watch = _DelimiterWatch(delim)
        stream = backend.generate_stream(cur)
        events = iter(stream)
        outcome = "stop"
        try:
            for ev in events:
                if watch.feed(ev.token_text):
                    record.thinking_token_count += _settle_delimiter(
                        thinking, ev.token_text, delim
                    )
                    outcome = "delimiter"
                    break
                if ev.token_text:
                    thinking.append(ev.token_text)
                    record.thinking_token_count += 1
                    if record.thinking_token_count >= policy.max_thinking_tokens:
                        outcome = "cap"
                        break
        except BackendError as exc:
            record.usage.add(stream.usage)
            record.thinking_text = "".join(thinking)
            record.failed = True
            record.failure_reason = f"backend_error: {exc}"
            return record

        if outcome == "delimiter":
            if policy.mode == "extrapolate" and waits_used < policy.wait_count:
                record.usage.add(stream.usage)  # abandon the rest of this stream
                waits_used += 1
                record.intervention_log.append(
                    {"wait_injected_at": record.thinking_token_count}
                )
                thinking.append(policy.wait_token)
                cur = continuation("")
                continue
            # Delimiter passes through: the same stream now carries the answer.
            try:
                consume_answer(stream, events)
            except BackendError as exc:
                record.thinking_text = "".join(thinking)
                record.failed = True
                record.failure_reason = f"backend_error: {exc}"
                return record
            break

        record.usage.add(stream.usage)
        if outcome == "cap":
            record.intervention_log.append(
                {"truncated_at": record.thinking_token_count}
            )
        # Cap hit or natural stop without a delimiter: elicit the answer.
        try:
            ans_req = continuation(delim + policy.answer_trigger)
            consume_answer(backend.generate_stream(ans_req))
        except BackendError as exc:
            record.thinking_text = "".join(thinking)
            record.failed = True
            record.failure_reason = f"backend_error: {exc}"
            return record
        break

    record.thinking_text = "".join(thinking)
    record.answer_text = "".join(answer)
    if not record.answer_text.strip():
        record.failed = True
        record.failure_reason = "empty_answer"
    return record
