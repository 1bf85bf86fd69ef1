// Typed client for the sketch service REST API, used by the browser UI.
// The UI holds no state of its own: every view is rebuilt from these calls.

export type Uuid = string;
export type Timestamp = string;
export type Medium = "analog-capture" | "digital-upload";

export interface BlobRef {
  hash: string;
  mime: string;
  size: number;
}

export interface MetadataEntry {
  key: string;
  value: string;
}

export interface Metadata {
  title?: string;
  authors: string[];
  date?: string;
  extra: MetadataEntry[];
}

export type Annotation = { id: Uuid; created_at: Timestamp } & (
  | { kind: "text"; body: string }
  | { kind: "audio"; blob: BlobRef }
  | { kind: "video"; blob: BlobRef }
);

export interface Revision {
  seq: number;
  image: BlobRef;
  medium: Medium;
  commit_message: string;
  metadata: Metadata;
  annotations: Annotation[];
  created_at: Timestamp;
}

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Anchor {
  sketch: Uuid;
  revision?: number;
  region?: Rect;
}

export interface AnchorRequest extends Anchor {
  follow_latest?: boolean;
}

export interface Link {
  id: Uuid;
  source: Anchor;
  target: Anchor;
  label?: string;
  created_at: Timestamp;
}

export interface DirectedLink extends Link {
  direction: "outgoing" | "incoming";
}

export interface SketchSummary {
  id: Uuid;
  title?: string;
  head_seq: number;
  created_at: Timestamp;
  updated_at: Timestamp;
  thumbnail: string;
}

export interface SketchDetail {
  id: Uuid;
  created_at: Timestamp;
  head_seq: number;
  revisions: Revision[];
  links: DirectedLink[];
}

export interface IngestOutcome {
  path: "sketch-created" | "revision-appended";
  sketch: Uuid;
  seq: number;
  label?: Uuid;
  revision: Revision;
  warnings?: string[];
}

export type ScanResult =
  | { status: "resolved"; sketch: SketchSummary; head: Revision; links: DirectedLink[]; warnings?: string[] }
  | { status: "unknown-id"; uuid: Uuid }
  | { status: "no-code" };

export interface ApiError {
  status: number;
  code: string;
  message: string;
}

export class ApiFailure extends Error {
  constructor(readonly error: ApiError) {
    super(`${error.code}: ${error.message}`);
  }
}

export interface MetadataFields {
  title?: string;
  authors?: string[];
  date?: string;
  extra?: MetadataEntry[];
}

function appendMetadata(form: FormData, metadata: MetadataFields = {}): void {
  if (metadata.title) form.append("title", metadata.title);
  for (const author of metadata.authors ?? []) form.append("author", author);
  if (metadata.date) form.append("date", metadata.date);
  for (const { key, value } of metadata.extra ?? []) form.append("extra", `${key}=${value}`);
}

export function imageUrl(base: string, sketch: Uuid, seq: number): string {
  return `${base}/api/sketches/${sketch}/revisions/${seq}/image`;
}

export function blobUrl(base: string, hash: string): string {
  return `${base}/api/blobs/${hash}`;
}

// Converts a drag between two points on a displayed image into a
// resolution-independent rect. Returns null for zero-area selections.
export function normalizeDrag(
  start: { x: number; y: number },
  end: { x: number; y: number },
  displayed: { width: number; height: number },
): Rect | null {
  const clamp = (v: number) => Math.min(1, Math.max(0, v));
  const xs = [start.x, end.x].map((x) => clamp(x / displayed.width)).sort((a, b) => a - b);
  const ys = [start.y, end.y].map((y) => clamp(y / displayed.height)).sort((a, b) => a - b);
  if (xs[0] === xs[1] || ys[0] === ys[1]) return null;
  return { x0: xs[0], y0: ys[0], x1: xs[1], y1: ys[1] };
}

export class SketchApi {
  constructor(readonly base: string = "") {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.base}${path}`, init);
    if (!response.ok) {
      let error: ApiError;
      try {
        error = await response.json();
      } catch {
        error = { status: response.status, code: "http-error", message: response.statusText };
      }
      throw new ApiFailure(error);
    }
    return response.status === 204 ? (undefined as T) : response.json();
  }

  listSketches(): Promise<SketchSummary[]> {
    return this.call("/api/sketches");
  }

  sketch(id: Uuid): Promise<SketchDetail> {
    return this.call(`/api/sketches/${id}`);
  }

  ingest(
    image: Blob,
    options: { uuid?: Uuid; commitMessage?: string; medium?: Medium; carryMetadata?: boolean; metadata?: MetadataFields } = {},
  ): Promise<IngestOutcome> {
    const form = new FormData();
    form.append("image", image);
    if (options.uuid) form.append("uuid", options.uuid);
    if (options.commitMessage) form.append("commit_message", options.commitMessage);
    if (options.medium) form.append("medium", options.medium);
    if (options.carryMetadata !== undefined) form.append("carry_metadata", String(options.carryMetadata));
    appendMetadata(form, options.metadata);
    return this.call("/api/sketches", { method: "POST", body: form });
  }

  addRevision(
    id: Uuid,
    image: Blob,
    options: { commitMessage: string; expectedHead: number; carryMetadata: boolean; medium?: Medium; metadata?: MetadataFields },
  ): Promise<Revision> {
    const form = new FormData();
    form.append("image", image);
    form.append("commit_message", options.commitMessage);
    form.append("expected_head", String(options.expectedHead));
    form.append("carry_metadata", String(options.carryMetadata));
    form.append("medium", options.medium ?? "digital-upload");
    appendMetadata(form, options.metadata);
    return this.call(`/api/sketches/${id}/revisions`, { method: "POST", body: form });
  }

  annotateText(id: Uuid, seq: number, body: string): Promise<Annotation> {
    return this.call(`/api/sketches/${id}/revisions/${seq}/annotations`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind: "text", body }),
    });
  }

  annotateMedia(id: Uuid, seq: number, kind: "audio" | "video", file: Blob): Promise<Annotation> {
    const form = new FormData();
    form.append("kind", kind);
    form.append("mime", file.type);
    form.append("file", file);
    return this.call(`/api/sketches/${id}/revisions/${seq}/annotations`, { method: "POST", body: form });
  }

  links(id: Uuid): Promise<DirectedLink[]> {
    return this.call(`/api/sketches/${id}/links`);
  }

  createLink(source: AnchorRequest, target: AnchorRequest, label?: string): Promise<Link> {
    return this.call("/api/links", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ source, target, label }),
    });
  }

  deleteLink(id: Uuid): Promise<void> {
    return this.call(`/api/links/${id}`, { method: "DELETE" });
  }

  scan(image: Blob): Promise<ScanResult> {
    const form = new FormData();
    form.append("image", image);
    return this.call("/api/scan", { method: "POST", body: form });
  }

  async labelSheet(forSketch?: Uuid): Promise<{ ids: Uuid[]; svg: string }> {
    const query = forSketch ? `?for_sketch=${forSketch}` : "";
    const response = await fetch(`${this.base}/api/labels/sheet${query}`);
    if (!response.ok) throw new ApiFailure(await response.json());
    const ids = (response.headers.get("x-label-ids") ?? "").split(",").filter(Boolean);
    return { ids, svg: await response.text() };
  }
}
