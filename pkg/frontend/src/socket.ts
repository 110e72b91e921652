// Room connection: join handshake, outbound sequence numbering, reconnect.

import type { Pose, ServerMessage } from './types';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface RoomOptions {
  baseUrl: string; // e.g. ws://localhost:8000
  roomId: string;
  name: string;
  landscapeId: string;
  screen: [number, number];
  socketFactory?: SocketFactory;
  onMessage: (msg: ServerMessage) => void;
  onConnectionChange?: (connected: boolean) => void;
}

const RECONNECT_DELAY_MS = 2000;

export class RoomConnection {
  private socket: SocketLike | null = null;
  private seq = 0;
  private closed = false;

  constructor(private readonly options: RoomOptions) {}

  connect(): void {
    const factory =
      this.options.socketFactory ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike);
    const socket = factory(`${this.options.baseUrl}/rooms/${this.options.roomId}`);
    this.socket = socket;
    socket.onopen = () => {
      this.send({
        type: 'join',
        name: this.options.name,
        landscapeId: this.options.landscapeId,
        screen: this.options.screen,
      });
      this.options.onConnectionChange?.(true);
    };
    socket.onmessage = (event) => {
      let parsed: ServerMessage;
      try {
        parsed = JSON.parse(event.data) as ServerMessage;
      } catch {
        return;
      }
      if (parsed.type === 'ping') {
        this.send({ type: 'pong' });
        return;
      }
      this.options.onMessage(parsed);
    };
    socket.onclose = () => {
      this.options.onConnectionChange?.(false);
      if (!this.closed) {
        // resync happens naturally: rejoin delivers a welcome snapshot and
        // a full appearance delta
        setTimeout(() => this.connect(), RECONNECT_DELAY_MS);
      }
    };
  }

  private send(payload: Record<string, unknown>): void {
    this.seq += 1;
    this.socket?.send(
      JSON.stringify({ roomId: this.options.roomId, seq: this.seq, ...payload }),
    );
  }

  sendCameraUpdate(pose: Pose): void {
    this.send({ type: 'cameraUpdate', pose });
  }

  sendHighlight(entityId: string, color: string | null): void {
    this.send({ type: 'highlight', entityId, color });
  }

  sendSpectateStart(targetId: string): void {
    this.send({ type: 'spectateStart', targetId });
  }

  sendSpectateStop(): void {
    this.send({ type: 'spectateStop' });
  }

  requestSync(): void {
    this.send({ type: 'sync' });
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
