import { describe, expect, it } from "vitest";

import { RiderLink, SocketLike } from "../src/net.js";
import { setVehicleMsg } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((text: string) => void) | null = null;
  onclose: (() => void) | null = null;
  closed = false;

  send(text: string): void {
    this.sent.push(text);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const timers: (() => void)[] = [];
  const statuses: string[] = [];
  const messages: unknown[] = [];
  const link = new RiderLink(
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    {
      onStatus: (s) => statuses.push(s),
      onMessage: (m) => messages.push(m),
    },
    { retryMs: 1000, now: () => 123, setTimer: (fn) => timers.push(fn) },
  );
  return { link, sockets, timers, statuses, messages };
}

describe("RiderLink", () => {
  it("sends hello with seq 1 on open", () => {
    const { link, sockets } = harness();
    link.connect("ws://x");
    sockets[0].onopen?.();
    const hello = JSON.parse(sockets[0].sent[0]);
    expect(hello.kind).toBe("hello");
    expect(hello.seq).toBe(1);
    expect(hello.sender).toBe("console");
  });

  it("keeps seq strictly increasing across reconnects", () => {
    const { link, sockets, timers } = harness();
    link.connect("ws://x");
    sockets[0].onopen?.();
    link.send((s, q, t) => setVehicleMsg(s, q, t, "segway"));
    const seqsBefore = sockets[0].sent.map((f) => JSON.parse(f).seq as number);

    sockets[0].onclose?.();           // drop
    expect(timers).toHaveLength(1);
    timers[0]();                      // retry fires
    sockets[1].onopen?.();
    link.send((s, q, t) => setVehicleMsg(s, q, t, "unicycle"));
    const seqsAfter = sockets[1].sent.map((f) => JSON.parse(f).seq as number);

    const all = [...seqsBefore, ...seqsAfter];
    for (let i = 1; i < all.length; i++) {
      expect(all[i]).toBeGreaterThan(all[i - 1]);
    }
  });

  it("reports connecting, connected, disconnected statuses", () => {
    const { link, sockets, statuses } = harness();
    link.connect("ws://x");
    sockets[0].onopen?.();
    sockets[0].onclose?.();
    expect(statuses).toEqual(["connecting", "connected", "disconnected"]);
  });

  it("retries after drop but not after a user close", () => {
    const { link, sockets, timers } = harness();
    link.connect("ws://x");
    sockets[0].onopen?.();
    link.close();
    expect(sockets[0].closed).toBe(true);
    expect(timers).toHaveLength(0);
  });

  it("dispatches parsed session messages and tolerates garbage", () => {
    const { link, sockets, messages } = harness();
    link.connect("ws://x");
    sockets[0].onopen?.();
    sockets[0].onmessage?.("{broken");
    sockets[0].onmessage?.(JSON.stringify({
      kind: "ack", sender: "session", seq: 1, t_ms: 0, ref_seq: 1,
    }));
    expect(messages).toHaveLength(1);
    expect((messages[0] as { kind: string }).kind).toBe("ack");
  });

  it("send is a no-op while disconnected", () => {
    const { link, sockets } = harness();
    link.connect("ws://x");
    expect(link.send((s, q, t) => setVehicleMsg(s, q, t, "segway"))).toBe(false);
    expect(sockets[0].sent).toHaveLength(0);
  });
});
