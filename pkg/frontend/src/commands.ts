/** Command construction and ack correlation.
 *
 * The server answers commands on a connection in order, one ack object per
 * command, so correlation is a FIFO of pending resolvers.  Telemetry
 * frames interleave freely and never consume a pending slot.
 */

import type { Ack, ConsoleCommand, Point } from "./types.js";

export function drawPathCommand(vehicleId: number, waypoints: Point[]): ConsoleCommand {
  return { kind: "draw_path", vehicle_id: vehicleId, waypoints };
}

export function setGoalCommand(vehicleId: number, goal: Point): ConsoleCommand {
  return { kind: "set_goal", vehicle_id: vehicleId, waypoints: [goal] };
}

export function startScenarioCommand(
  scenario: string,
  params?: Record<string, unknown>,
): ConsoleCommand {
  const cmd: ConsoleCommand = { kind: "start_scenario", scenario };
  if (params !== undefined) cmd.params = params;
  return cmd;
}

export function stopCommand(): ConsoleCommand {
  return { kind: "stop" };
}

export class AckQueue {
  private pending: {
    resolve: (ack: Ack) => void;
    reject: (err: Error) => void;
  }[] = [];

  /** Register a command just sent; resolves with its ack. */
  expect(): Promise<Ack> {
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
    });
  }

  /** Feed a received ack to the oldest waiter.  Returns false if no
   * command was outstanding (a protocol surprise the caller can log). */
  settle(ack: Ack): boolean {
    const waiter = this.pending.shift();
    if (waiter === undefined) return false;
    waiter.resolve(ack);
    return true;
  }

  /** Connection dropped: every outstanding command fails. */
  abortAll(reason: string): void {
    const waiters = this.pending;
    this.pending = [];
    for (const w of waiters) w.reject(new Error(reason));
  }

  get depth(): number {
    return this.pending.length;
  }
}
