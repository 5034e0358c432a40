/**
 * Scene-by-scene playback: frames advance manually or on a timer and loop
 * back to the first after the last.
 */

import type { PlaybackFrame, PlaybackManifest } from "./types.js";

export class PlaybackPlayer {
  readonly frames: PlaybackFrame[];
  index = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listeners: (() => void)[] = [];

  constructor(manifest: PlaybackManifest) {
    this.frames = manifest.frames;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  current(): PlaybackFrame | null {
    return this.frames[this.index] ?? null;
  }

  next(): PlaybackFrame | null {
    if (this.frames.length === 0) return null;
    this.index = (this.index + 1) % this.frames.length;
    this.emit();
    return this.current();
  }

  previous(): PlaybackFrame | null {
    if (this.frames.length === 0) return null;
    this.index = (this.index - 1 + this.frames.length) % this.frames.length;
    this.emit();
    return this.current();
  }

  start(intervalMs = 4000): void {
    this.stop();
    this.timer = setInterval(() => this.next(), intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get playing(): boolean {
    return this.timer !== null;
  }
}
