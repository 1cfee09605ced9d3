// Decorative wave: an animated sine band colored by the active voice.
// Flat and grey while paused.

import type { WaveColor } from './types.js';

const COLOR_VALUES: Record<WaveColor, string> = {
  blue: '#3b82f6',
  red: '#ef4444',
  green: '#22c55e',
  grey: '#9ca3af',
};

export class Wave {
  private color: WaveColor = 'grey';
  private phase = 0;
  private raf = 0;

  constructor(private canvas: HTMLCanvasElement) {
    this.frame = this.frame.bind(this);
    this.raf = requestAnimationFrame(this.frame);
  }

  setColor(color: WaveColor): void {
    this.color = color;
  }

  dispose(): void {
    cancelAnimationFrame(this.raf);
  }

  private frame(): void {
    const ctx = this.canvas.getContext('2d');
    if (ctx) {
      const { width, height } = this.canvas;
      ctx.clearRect(0, 0, width, height);
      ctx.strokeStyle = COLOR_VALUES[this.color];
      ctx.lineWidth = 3;
      ctx.beginPath();
      const amplitude = this.color === 'grey' ? 1 : height / 3;
      for (let x = 0; x <= width; x += 4) {
        const y = height / 2 + Math.sin(x / 24 + this.phase) * amplitude;
        if (x === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
      if (this.color !== 'grey') this.phase += 0.15;
    }
    this.raf = requestAnimationFrame(this.frame);
  }
}
