import { ApiClient, ApiRequestError } from './api';
import { decodePgm, GrayImage } from './pgm';
import { SegmentRunner } from './runner';
import {
  applyResult, displayedMetrics, initialState, overlayForSlice, setSeed,
  setSlice, setWindow, ViewerState,
} from './state';
import { clickToSeed, identityTransform, ViewTransform, voxelToScreen } from './transform';
import type { SegmentParams } from './types';

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

async function loadConfig(): Promise<{ apiBase: string }> {
  try {
    const res = await fetch('./config.json');
    if (res.ok) return (await res.json()) as { apiBase: string };
  } catch {
    /* same-origin default */
  }
  return { apiBase: '' };
}

class ViewerApp {
  state: ViewerState = initialState();
  transform: ViewTransform = { ...identityTransform };
  slice: GrayImage | null = null;
  private runner = new SegmentRunner(300);
  private canvas = $<HTMLCanvasElement>('view');
  private offscreen = document.createElement('canvas');
  private dragging = false;
  private dragStart: [number, number] | null = null;

  constructor(private api: ApiClient) {}

  bind(): void {
    $('file-input').addEventListener('change', (e) => void this.onUpload(e));
    this.canvas.addEventListener('click', (e) => this.onClick(e));
    this.canvas.addEventListener('wheel', (e) => this.onWheel(e), { passive: false });
    this.canvas.addEventListener('mousedown', (e) => {
      this.dragging = true;
      this.dragStart = [e.offsetX - this.transform.panX, e.offsetY - this.transform.panY];
    });
    this.canvas.addEventListener('mousemove', (e) => {
      if (!this.dragging || !this.dragStart) return;
      this.transform.panX = e.offsetX - this.dragStart[0];
      this.transform.panY = e.offsetY - this.dragStart[1];
      this.draw();
    });
    window.addEventListener('mouseup', () => (this.dragging = false));

    for (const id of ['rays', 'nodes', 'delta', 'scale'] as const) {
      $(`param-${id}`).addEventListener('change', () => {
        this.readParams();
        if (this.state.seed) this.runner.schedule(() => this.runSegment());
      });
    }
    $('param-delta').addEventListener('input', () => {
      $('delta-value').textContent = ($<HTMLInputElement>('param-delta')).value;
    });
    $('template-select').addEventListener('change', () => {
      this.state.template = $<HTMLSelectElement>('template-select').value;
      if (this.state.seed) this.runner.schedule(() => this.runSegment());
    });
    $('slice-slider').addEventListener('input', () => void this.onSlice());
    for (const id of ['window-lo', 'window-hi']) {
      $(id).addEventListener('change', () => void this.onWindow());
    }
    $('run-button').addEventListener('click', () => {
      if (this.state.seed) void this.runner.runNow(() => this.runSegment());
    });
    $('export-button').addEventListener('click', () => void this.exportMask());
    $('iterate-toggle').addEventListener('change', () => {
      this.state.iterate = $<HTMLInputElement>('iterate-toggle').checked;
    });
  }

  private readParams(): void {
    this.state.rays = parseInt($<HTMLInputElement>('param-rays').value, 10) || 360;
    const nodes = $<HTMLInputElement>('param-nodes').value;
    this.state.nodes = nodes ? parseInt(nodes, 10) : null;
    this.state.delta = parseInt($<HTMLInputElement>('param-delta').value, 10) || 0;
    this.state.scale = parseFloat($<HTMLInputElement>('param-scale').value) || 2.0;
  }

  private async onUpload(event: Event): Promise<void> {
    const input = event.target as HTMLInputElement;
    const files = Array.from(input.files ?? []);
    if (!files.length) return;
    try {
      let info;
      const pgm = files.find((f) => f.name.toLowerCase().endsWith('.pgm'));
      if (pgm) {
        info = await this.api.createSessionFromPgm(
          new Uint8Array(await pgm.arrayBuffer()));
      } else {
        const header = files.find((f) => !f.name.toLowerCase().endsWith('.raw'));
        const raw = files.find((f) => f.name.toLowerCase().endsWith('.raw'));
        if (!header || !raw) {
          this.status('select a .pgm, or a header file plus its .raw');
          return;
        }
        info = await this.api.createSessionFromVolume(
          await header.text(), new Uint8Array(await raw.arrayBuffer()));
      }
      this.state = { ...initialState(), session: info.session, dims: info.dims,
                     spacing: info.spacing };
      const is3d = info.dims.length === 3;
      $<HTMLInputElement>('slice-slider').max = String(is3d ? info.dims[2] - 1 : 0);
      $<HTMLInputElement>('slice-slider').value = String(
        is3d ? Math.floor(info.dims[2] / 2) : 0);
      this.state = setSlice(this.state, is3d ? Math.floor(info.dims[2] / 2) : 0);
      this.status(`session ${info.session.slice(0, 8)} (${info.dims.join('x')})`);
      await this.refreshSlice();
    } catch (err) {
      this.status(errText(err));
    }
  }

  private async onSlice(): Promise<void> {
    this.state = setSlice(this.state,
                          parseInt($<HTMLInputElement>('slice-slider').value, 10));
    await this.refreshSlice();
  }

  private async onWindow(): Promise<void> {
    const lo = parseFloat($<HTMLInputElement>('window-lo').value);
    const hi = parseFloat($<HTMLInputElement>('window-hi').value);
    if (!(hi > lo)) return;
    this.state = setWindow(this.state, lo, hi);
    await this.refreshSlice();
  }

  private async refreshSlice(): Promise<void> {
    if (!this.state.session) return;
    try {
      const bytes = await this.api.getSlice(
        this.state.session, this.state.axis, this.state.sliceIndex,
        [this.state.windowLo, this.state.windowHi]);
      this.slice = decodePgm(bytes);
      this.draw();
    } catch (err) {
      this.status(errText(err));
    }
  }

  private onClick(event: MouseEvent): void {
    if (!this.slice) return;
    const hit = clickToSeed(event.offsetX, event.offsetY, this.transform,
                            this.slice.width, this.slice.height);
    if (!hit) return; // clicks outside the image area are ignored
    const seed = this.state.dims.length === 3
      ? [hit[0], hit[1], this.state.sliceIndex]
      : [hit[0], hit[1]];
    this.state = setSeed(this.state, seed);
    this.draw();
    void this.runner.runNow(() => this.runSegment());
  }

  private onWheel(event: WheelEvent): void {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.25 : 0.8;
    const { offsetX, offsetY } = event;
    this.transform.panX = offsetX - (offsetX - this.transform.panX) * factor;
    this.transform.panY = offsetY - (offsetY - this.transform.panY) * factor;
    this.transform.zoom *= factor;
    this.draw();
  }

  private async runSegment(): Promise<void> {
    if (!this.state.session || !this.state.seed) return;
    this.status('segmenting...');
    const params: SegmentParams = {
      seed: this.state.seed,
      template: this.state.template,
      rays: this.state.rays,
      nodes: this.state.nodes,
      delta: this.state.delta,
      scale: this.state.scale,
    };
    if (this.state.iterate) params.iterate = { max_iters: this.state.maxIters };
    try {
      const result = await this.api.segment(this.state.session, params);
      this.state = applyResult(this.state, result);
      this.showMetrics();
      $<HTMLButtonElement>('export-button').disabled = false;
      this.draw();
    } catch (err) {
      this.status(errText(err));
    }
  }

  private showMetrics(): void {
    const m = displayedMetrics(this.state);
    if (!m) return;
    // every number here came out of the API payload verbatim
    this.status(
      `cut ${m.cutValue.toPrecision(6)} | ${m.voxelCount} voxels | ` +
      `${m.runtimeMs.toFixed(0)} ms | seed ${m.seedQuality}` +
      (m.iterations > 1 ? ` | ${m.iterations} passes` : '') +
      (m.warnings.length ? ` | WARN: ${m.warnings[0]}` : ''));
  }

  private async exportMask(): Promise<void> {
    if (!this.state.session) return;
    try {
      const bytes = await this.api.getMask(this.state.session);
      const blob = new Blob([bytes.buffer as ArrayBuffer]);
      const a = document.createElement('a');
      a.href = URL.createObjectURL(blob);
      a.download = this.state.dims.length === 3 ? 'mask.json' : 'mask.pgm';
      a.click();
      URL.revokeObjectURL(a.href);
    } catch (err) {
      this.status(errText(err));
    }
  }

  private draw(): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx || !this.slice) return;
    const { width, height, pixels } = this.slice;
    this.offscreen.width = width;
    this.offscreen.height = height;
    const octx = this.offscreen.getContext('2d')!;
    const img = octx.createImageData(width, height);
    for (let i = 0; i < pixels.length; i++) {
      const v = pixels[i];
      img.data[4 * i] = v;
      img.data[4 * i + 1] = v;
      img.data[4 * i + 2] = v;
      img.data[4 * i + 3] = 255;
    }
    octx.putImageData(img, 0, 0);

    ctx.fillStyle = '#111';
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.imageSmoothingEnabled = false;
    ctx.save();
    ctx.translate(this.transform.panX, this.transform.panY);
    ctx.scale(this.transform.zoom, this.transform.zoom);
    ctx.drawImage(this.offscreen, 0, 0);
    ctx.restore();

    ctx.strokeStyle = '#ff5050';
    ctx.lineWidth = 1.5;
    for (const line of overlayForSlice(this.state)) {
      ctx.beginPath();
      line.forEach(([x, y], i) => {
        const [sx, sy] = voxelToScreen(x, y, this.transform);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.stroke();
    }

    if (this.state.seed) {
      const [sx, sy] = voxelToScreen(this.state.seed[0], this.state.seed[1],
                                     this.transform);
      ctx.strokeStyle = '#ffe100';
      ctx.beginPath();
      ctx.moveTo(sx - 6, sy);
      ctx.lineTo(sx + 6, sy);
      ctx.moveTo(sx, sy - 6);
      ctx.lineTo(sx, sy + 6);
      ctx.stroke();
    }
  }

  private status(text: string): void {
    $('status-line').textContent = text;
  }
}

function errText(err: unknown): string {
  if (err instanceof ApiRequestError) return `${err.token}: ${err.message}`;
  return String(err);
}

async function boot(): Promise<void> {
  const config = await loadConfig();
  const app = new ViewerApp(new ApiClient(config.apiBase));
  app.bind();
  const api = new ApiClient(config.apiBase);
  try {
    const names = await api.listTemplates();
    const select = $<HTMLSelectElement>('template-select');
    select.innerHTML = '';
    for (const name of names) {
      const opt = document.createElement('option');
      opt.value = name;
      opt.textContent = name;
      if (name === 'circle') opt.selected = true;
      select.appendChild(opt);
    }
  } catch {
    /* server not up yet; keep the static defaults */
  }
}

if (typeof document !== 'undefined' && document.getElementById('view')) {
  void boot();
}
