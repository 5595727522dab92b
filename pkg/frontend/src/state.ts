// View state and request sequencing. Every control keeps one in-flight
// request; issuing a new one aborts and supersedes the old, and a
// response is applied only if it is still the latest for that control,
// so the rendered overlays always reflect the last completed query for
// the current threshold.

import { ApiError, ExplorerApi, type ProfilePayload } from "./api.js";
import { replacedCount } from "./charts.js";

export interface ViewState {
    threshold: number;
    sampleSize: number;
    sampleSeed: number;
    profiles: ProfilePayload[];
    profilesThreshold: number | null;  // threshold the overlays were computed at
    replacedTotal: number;             // badge: replaced points across the grid
    committedThreshold: number | null;
    commitStatus: "idle" | "saving" | "saved" | "conflict";
    banner: string | null;             // retryable error message
    loading: boolean;
}

export type Listener = (state: ViewState) => void;

interface ControlSlot {
    seq: number;
    controller: AbortController | null;
}

export class ExplorerStore {
    private state: ViewState;
    private listeners: Listener[] = [];
    private slots: Record<"grid" | "meta", ControlSlot> = {
        grid: { seq: 0, controller: null },
        meta: { seq: 0, controller: null },
    };
    private sampledIds: number[] = [];
    private lastAction: (() => Promise<void>) | null = null;

    constructor(private readonly api: ExplorerApi, initial?: Partial<ViewState>) {
        this.state = {
            threshold: 0.1,
            sampleSize: 36,
            sampleSeed: 1,
            profiles: [],
            profilesThreshold: null,
            replacedTotal: 0,
            committedThreshold: null,
            commitStatus: "idle",
            banner: null,
            loading: false,
            ...initial,
        };
    }

    get current(): ViewState {
        return { ...this.state };
    }

    subscribe(listener: Listener): () => void {
        this.listeners.push(listener);
        return () => {
            this.listeners = this.listeners.filter((fn) => fn !== listener);
        };
    }

    private emit(patch: Partial<ViewState>): void {
        this.state = { ...this.state, ...patch };
        for (const listener of this.listeners) {
            listener(this.current);
        }
    }

    private begin(name: "grid" | "meta"): { seq: number; signal: AbortSignal } {
        const slot = this.slots[name];
        slot.controller?.abort();
        slot.controller = new AbortController();
        slot.seq += 1;
        return { seq: slot.seq, signal: slot.controller.signal };
    }

    private isCurrent(name: "grid" | "meta", seq: number): boolean {
        return this.slots[name].seq === seq;
    }

    private fail(error: unknown, retry: () => Promise<void>): void {
        if (error instanceof DOMException && error.name === "AbortError") {
            return; // superseded on purpose
        }
        this.lastAction = retry;
        const message =
            error instanceof ApiError
                ? `API error ${error.status || ""}: ${error.message}`
                : `Unexpected error: ${String(error)}`;
        this.emit({ banner: message.trim(), loading: false });
    }

    async retry(): Promise<void> {
        const action = this.lastAction;
        this.emit({ banner: null });
        if (action) {
            await action();
        }
    }

    async loadMeta(): Promise<void> {
        const { seq, signal } = this.begin("meta");
        try {
            const meta = await this.api.meta(signal);
            if (!this.isCurrent("meta", seq)) {
                return;
            }
            this.emit({
                committedThreshold: meta.threshold,
                threshold: this.state.profilesThreshold ?? meta.threshold,
            });
        } catch (error) {
            this.fail(error, () => this.loadMeta());
        }
    }

    /** Draw (or redraw) the sample, then overlay at the current threshold. */
    async resample(size?: number, seed?: number): Promise<void> {
        const sampleSize = size ?? this.state.sampleSize;
        const sampleSeed = seed ?? this.state.sampleSeed;
        const { seq, signal } = this.begin("grid");
        this.emit({ sampleSize, sampleSeed, loading: true, banner: null });
        try {
            const sample = await this.api.sample(sampleSize, sampleSeed, signal);
            if (!this.isCurrent("grid", seq)) {
                return;
            }
            this.sampledIds = sample.profiles.map((profile) => profile.id);
            await this.overlayAt(this.state.threshold, seq, signal);
        } catch (error) {
            this.fail(error, () => this.resample(sampleSize, sampleSeed));
        }
    }

    /** Re-query the sampled ids at a new threshold. */
    async setThreshold(threshold: number): Promise<void> {
        this.emit({ threshold, commitStatus: "idle" });
        if (this.sampledIds.length === 0) {
            return;
        }
        const { seq, signal } = this.begin("grid");
        this.emit({ loading: true, banner: null });
        try {
            await this.overlayAt(threshold, seq, signal);
        } catch (error) {
            this.fail(error, () => this.setThreshold(threshold));
        }
    }

    private async overlayAt(
        threshold: number,
        seq: number,
        signal: AbortSignal,
    ): Promise<void> {
        const profiles = await Promise.all(
            this.sampledIds.map((id) => this.api.repair(id, threshold, signal)),
        );
        if (!this.isCurrent("grid", seq)) {
            return; // a newer request superseded this one: never render stale overlays
        }
        this.emit({
            profiles,
            profilesThreshold: threshold,
            replacedTotal: profiles.reduce(
                (total, profile) => total + replacedCount(profile),
                0,
            ),
            loading: false,
        });
    }

    async commit(): Promise<void> {
        const value = this.state.threshold;
        this.emit({ commitStatus: "saving", banner: null });
        try {
            const stored = await this.api.commitThreshold(value);
            this.emit({ committedThreshold: stored.stored, commitStatus: "saved" });
        } catch (error) {
            if (error instanceof ApiError && error.status === 409) {
                this.emit({
                    commitStatus: "conflict",
                    banner: "Config is locked by a running pipeline stage; try again when it finishes.",
                });
                return;
            }
            this.emit({ commitStatus: "idle" });
            this.fail(error, () => this.commit());
        }
    }
}

/** Trailing-edge debounce for slider input. */
export function debounce<A extends unknown[]>(
    fn: (...args: A) => void,
    waitMs: number,
): (...args: A) => void {
    let timer: ReturnType<typeof setTimeout> | null = null;
    return (...args: A) => {
        if (timer !== null) {
            clearTimeout(timer);
        }
        timer = setTimeout(() => {
            timer = null;
            fn(...args);
        }, waitMs);
    };
}
