"""Real-time simulation server speaking JSON text frames over websockets.

One simulation session per connection, owned entirely by that connection's
handler; the network side exchanges immutable JSON messages with the session.
The fixed-step loop paces simulated time to the wall clock and falls behind
rather than skipping steps when overloaded.
"""
from __future__ import annotations

import asyncio
import json
import time
from typing import Optional

from .conditioning import ChannelId
from .config import RunConfig, default_run_config
from .errors import ConfigurationError
from .estimation import CalibrationProfile
from .session import LiveSession, TelemetrySample

# How far the sim may run ahead of messages in one scheduling slice.
MAX_TICKS_PER_SLICE = 100


def _state_frame(ts: TelemetrySample) -> str:
    d = ts.to_dict()
    d["type"] = "state"
    return json.dumps(d, sort_keys=True)


def _error_frame(msg: str) -> str:
    return json.dumps({"type": "error", "msg": msg})


def handle_message(session: LiveSession, raw: str) -> Optional[str]:
    """Apply one client frame to the session; returns an error frame or None."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as e:
        return _error_frame(f"malformed JSON: {e}")
    if not isinstance(msg, dict) or "type" not in msg:
        return _error_frame("frame must be an object with a 'type' field")
    kind = msg["type"]
    if kind == "activation":
        try:
            levels = {
                ChannelId.BICEPS: float(msg.get("biceps", 0.0)),
                ChannelId.TRICEPS: float(msg.get("triceps", 0.0)),
                ChannelId.TRAPEZIUS: float(msg.get("trapezius", 0.0)),
                ChannelId.PECTORALIS: float(msg.get("pectoralis", 0.0)),
            }
            session.apply_command(float(msg.get("t", 0.0)), levels)
        except (TypeError, ValueError) as e:
            return _error_frame(f"bad activation frame: {e}")
        return None
    if kind == "scenario":
        try:
            session.select_scenario(str(msg.get("name", "")))
        except ConfigurationError as e:
            return _error_frame(str(e))
        return None
    if kind == "reset":
        session.reset()
        return None
    return _error_frame(f"unknown frame type: {kind!r}")


async def _session_handler(
    websocket,
    config: RunConfig,
    profile: CalibrationProfile,
    seed: int,
    scenario: Optional[str] = None,
):
    session = LiveSession(config, profile, seed=seed)
    if scenario is not None:
        session.select_scenario(scenario)
    dt = session.chain.dt_ctrl
    send_queue: asyncio.Queue = asyncio.Queue()

    async def reader():
        try:
            async for raw in websocket:
                err = handle_message(session, raw)
                if err is not None:
                    await send_queue.put(err)
        except Exception:
            pass
        finally:
            session.connection_lost()

    async def ticker():
        start = time.monotonic()
        while True:
            while not send_queue.empty():
                await websocket.send(send_queue.get_nowait())
            target = time.monotonic() - start
            ticks = 0
            while session.sim_time_s < target and ticks < MAX_TICKS_PER_SLICE:
                ts = session.tick()
                ticks += 1
                if ts is not None:
                    await websocket.send(_state_frame(ts))
            await asyncio.sleep(dt)

    reader_task = asyncio.create_task(reader())
    ticker_task = asyncio.create_task(ticker())
    try:
        done, pending = await asyncio.wait(
            [reader_task, ticker_task], return_when=asyncio.FIRST_EXCEPTION
        )
    finally:
        for task in (reader_task, ticker_task):
            task.cancel()


async def serve_async(
    host: str,
    port: int,
    config: Optional[RunConfig] = None,
    profile: Optional[CalibrationProfile] = None,
    seed: int = 0,
    scenario: Optional[str] = None,
):
    """Bind the websocket endpoint; one LiveSession per connection."""
    import websockets

    config = config or default_run_config()
    profile = profile or CalibrationProfile()

    async def handler(websocket):
        await _session_handler(websocket, config, profile, seed, scenario)

    return await websockets.serve(handler, host, port)


def serve_forever(
    host: str,
    port: int,
    config: Optional[RunConfig] = None,
    profile: Optional[CalibrationProfile] = None,
    seed: int = 0,
    scenario: Optional[str] = None,
):
    async def runner():
        server = await serve_async(host, port, config, profile, seed, scenario)
        await asyncio.Future()

    asyncio.run(runner())
