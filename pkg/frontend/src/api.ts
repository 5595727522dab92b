// Typed client over the explorer endpoints. Every number shown in the
// UI originates from these responses; money stays a decimal string end
// to end.

export interface SeriesPoint {
    year: number;
    wage: string | null;
    fitted: string | null;
    weight: number | null;
    replaced: boolean;
    final: string | null;
}

export interface ProfilePayload {
    id: number;
    threshold: number;
    eligible: boolean;
    skipped_reason: string | null;
    converged: boolean | null;
    series: SeriesPoint[];
}

export interface SamplePayload {
    seed: number;
    threshold: number;
    profiles: ProfilePayload[];
}

export interface Meta {
    dataset_digest: string;
    individuals: number;
    observations: number;
    threshold: number;
}

export interface SweepPoint {
    threshold: number;
    count: number;
    replaced_years: number[];
}

export interface SweepPayload {
    id: number;
    points: SweepPoint[];
}

export class ApiError extends Error {
    constructor(readonly status: number, message: string) {
        super(message);
        this.name = "ApiError";
    }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
        response = await fetch(url, init);
    } catch (err) {
        if (err instanceof DOMException && err.name === "AbortError") {
            throw err;
        }
        throw new ApiError(0, `cannot reach the explorer API (${String(err)})`);
    }
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = (await response.json()) as { detail?: unknown };
            if (typeof body.detail === "string") {
                detail = body.detail;
            }
        } catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
}

export class ExplorerApi {
    constructor(private readonly baseUrl: string = "") {}

    meta(signal?: AbortSignal): Promise<Meta> {
        return request<Meta>(`${this.baseUrl}/meta`, { signal });
    }

    sample(n: number, seed: number, signal?: AbortSignal): Promise<SamplePayload> {
        return request<SamplePayload>(
            `${this.baseUrl}/sample?n=${n}&seed=${seed}`,
            { signal },
        );
    }

    repair(id: number, threshold: number, signal?: AbortSignal): Promise<ProfilePayload> {
        return request<ProfilePayload>(
            `${this.baseUrl}/repair?id=${id}&threshold=${threshold}`,
            { signal },
        );
    }

    sweep(id: number, steps: number, signal?: AbortSignal): Promise<SweepPayload> {
        return request<SweepPayload>(
            `${this.baseUrl}/sweep?id=${id}&steps=${steps}`,
            { signal },
        );
    }

    commitThreshold(value: number): Promise<{ stored: number }> {
        return request<{ stored: number }>(`${this.baseUrl}/threshold`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ value }),
        });
    }
}
