"""Adapter for an external completion service.

Requests are few-shot prompts built from demonstration blocks plus one open
query block. Two modes share a layout and differ only in the result header:
state mode asks for the resulting document text, program mode for a command
expression. Both leave the gold-utterance line blank for the service to fill,
which doubles as ASR normalization.

The wire format is one JSON object each way: {"prompt": ...} in,
{"completion": ...} back. Failures surface as distinct, non-fatal errors so a
pipeline can degrade to its local stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import requests

from .document import DocumentState
from .dsl.ast import Program
from .dsl.parser import parse_program
from .errors import (
    CompletionFormatError,
    CompletionTimeout,
    ParseError,
    TransportError,
)

STATE_HEADER = "[Final State:]"
PROGRAM_HEADER = "[Lispress:]"

EXTERNAL_CONFIDENCE = math.log(0.8)


@dataclass(frozen=True)
class Demonstration:
    """One worked example: raw utterance, its cleaned form, the outcome."""

    input_state: str
    utterance: str
    gold_utterance: str
    result: str  # document text in state mode, a program in program mode


def _demo_block(demo: Demonstration, header: str) -> str:
    lines = [
        "[Input State:]",
        demo.input_state,
        f"[Utterance ASR:] {demo.utterance}",
        f"[Gold Utterance:] {demo.gold_utterance}",
    ]
    if header == STATE_HEADER:
        lines.append(header)
        lines.append(demo.result)
    else:
        lines.append(f"{header} {demo.result}")
    return "\n".join(lines)


def _query_block(input_state: str, utterance: str, header: str) -> str:
    return "\n".join(
        [
            "[Input State:]",
            input_state,
            f"[Utterance ASR:] {utterance}",
            "[Gold Utterance:]",
            header,
        ]
    )


def build_state_prompt(
    demos: Sequence[Demonstration], input_state: str, utterance: str
) -> str:
    blocks = [_demo_block(d, STATE_HEADER) for d in demos]
    blocks.append(_query_block(input_state, utterance, STATE_HEADER))
    return "\n\n".join(blocks)


def build_program_prompt(
    demos: Sequence[Demonstration], input_state: str, utterance: str
) -> str:
    blocks = [_demo_block(d, PROGRAM_HEADER) for d in demos]
    blocks.append(_query_block(input_state, utterance, PROGRAM_HEADER))
    return "\n\n".join(blocks)


def parse_completion(
    completion: str, mode: str
) -> tuple[Optional[str], str]:
    """Split a completion into (gold utterance, result).

    Services differ in how much of the prompt scaffolding they echo. A
    completion may be the bare result, or the gold utterance followed by the
    result header and the result. Anything after a second header is ignored.
    """
    header = STATE_HEADER if mode == "state" else PROGRAM_HEADER
    text = completion.strip("\n")
    if header in text:
        before, _, after = text.partition(header)
        gold = before.strip()
        if gold.startswith("[Gold Utterance:]"):
            gold = gold[len("[Gold Utterance:]") :].strip()
        result = after.split("\n\n")[0]
        if mode == "state":
            result = result[1:] if result.startswith("\n") else result.strip()
        else:
            result = result.strip()
        return (gold or None), result
    return None, text.strip() if mode != "state" else text


class HttpCompletionClient:
    """POSTs a prompt, returns the completion string."""

    def __init__(self, url: str, timeout_s: float = 30.0):
        self.url = url
        self.timeout_s = timeout_s

    def complete(self, prompt: str) -> str:
        try:
            response = requests.post(
                self.url, json={"prompt": prompt}, timeout=self.timeout_s
            )
            response.raise_for_status()
        except requests.Timeout as err:
            raise CompletionTimeout(str(err)) from err
        except requests.RequestException as err:
            raise TransportError(str(err)) from err
        try:
            payload = response.json()
            completion = payload["completion"]
        except (ValueError, KeyError) as err:
            raise CompletionFormatError(
                f"response is not {{'completion': ...}}: {err}"
            ) from err
        if not isinstance(completion, str):
            raise CompletionFormatError("completion must be a string")
        return completion


class ExternalInterpreter:
    """Program-mode stage: utterance in, command expression out.

    Usable directly as a pipeline interpreter. The blank gold-utterance line
    means the same call also yields a normalization, exposed via
    last_gold_utterance for callers that want it.
    """

    def __init__(
        self,
        client: HttpCompletionClient,
        demonstrations: Sequence[Demonstration] = (),
    ):
        self.client = client
        self.demonstrations = list(demonstrations)
        self.last_gold_utterance: Optional[str] = None

    def __call__(
        self, d_pre: DocumentState, utterance: str, start_ms: int = 0
    ) -> tuple[Program, float]:
        prompt = build_program_prompt(
            self.demonstrations, d_pre.content, utterance
        )
        completion = self.client.complete(prompt)
        gold, result = parse_completion(completion, "program")
        self.last_gold_utterance = gold
        try:
            program = parse_program(result)
        except ParseError as err:
            raise CompletionFormatError(
                f"completion is not a program: {err}"
            ) from err
        return program, EXTERNAL_CONFIDENCE


class ExternalNormalizer:
    """State-mode call used only for its gold-utterance side channel."""

    def __init__(
        self,
        client: HttpCompletionClient,
        demonstrations: Sequence[Demonstration] = (),
    ):
        self.client = client
        self.demonstrations = list(demonstrations)

    def __call__(
        self, d_pre: DocumentState, utterance: str, start_ms: int = 0
    ) -> tuple[str, float]:
        prompt = build_state_prompt(
            self.demonstrations, d_pre.content, utterance
        )
        completion = self.client.complete(prompt)
        gold, _ = parse_completion(completion, "state")
        if gold is None:
            return utterance, 0.0
        return gold, EXTERNAL_CONFIDENCE


class ExternalStateModel:
    """State-mode call for a resulting document, bypassing programs."""

    def __init__(
        self,
        client: HttpCompletionClient,
        demonstrations: Sequence[Demonstration] = (),
    ):
        self.client = client
        self.demonstrations = list(demonstrations)

    def final_state(
        self, d_pre: DocumentState, utterance: str
    ) -> tuple[Optional[str], DocumentState]:
        prompt = build_state_prompt(
            self.demonstrations, d_pre.content, utterance
        )
        completion = self.client.complete(prompt)
        gold, result = parse_completion(completion, "state")
        n = len(result)
        return gold, DocumentState(result, (n, n))
