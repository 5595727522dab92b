// DOM wiring for the threshold explorer.

import { ExplorerApi } from "./api.js";
import { buildProfileGrid } from "./charts.js";
import { ExplorerStore, debounce, type ViewState } from "./state.js";

const SLIDER_MIN = 0;
const SLIDER_MAX = 0.5;   // weights above 0.5 are never plausibly outliers
const SLIDER_STEP = 0.005;

function byId<T extends HTMLElement>(id: string): T {
    const element = document.getElementById(id);
    if (!element) {
        throw new Error(`missing element #${id}`);
    }
    return element as T;
}

export function mount(root: Document = document): void {
    const api = new ExplorerApi("");
    const store = new ExplorerStore(api);

    const slider = byId<HTMLInputElement>("threshold-slider");
    const thresholdLabel = byId<HTMLSpanElement>("threshold-value");
    const badge = byId<HTMLSpanElement>("replaced-badge");
    const committed = byId<HTMLSpanElement>("committed-value");
    const grid = byId<HTMLDivElement>("profile-grid");
    const banner = byId<HTMLDivElement>("error-banner");
    const bannerText = byId<HTMLSpanElement>("error-text");
    const retryButton = byId<HTMLButtonElement>("retry-button");
    const sizeInput = byId<HTMLInputElement>("sample-size");
    const seedInput = byId<HTMLInputElement>("sample-seed");
    const resampleButton = byId<HTMLButtonElement>("resample-button");
    const commitButton = byId<HTMLButtonElement>("commit-button");
    const loading = byId<HTMLSpanElement>("loading-indicator");

    slider.min = String(SLIDER_MIN);
    slider.max = String(SLIDER_MAX);
    slider.step = String(SLIDER_STEP);

    function render(state: ViewState): void {
        thresholdLabel.textContent = state.threshold.toFixed(3);
        badge.textContent = String(state.replacedTotal);
        committed.textContent =
            state.committedThreshold === null
                ? "—"
                : state.committedThreshold.toFixed(3);
        commitButton.textContent =
            state.commitStatus === "saving"
                ? "Saving…"
                : state.commitStatus === "saved"
                  ? "Saved"
                  : "Commit threshold";
        loading.hidden = !state.loading;
        banner.hidden = state.banner === null;
        bannerText.textContent = state.banner ?? "";
        grid.innerHTML = buildProfileGrid(state.profiles);
    }

    store.subscribe(render);
    render(store.current);

    const requery = debounce((value: number) => {
        void store.setThreshold(value);
    }, 150);

    slider.addEventListener("input", () => {
        const value = Number(slider.value);
        thresholdLabel.textContent = value.toFixed(3);
        requery(value);
    });

    resampleButton.addEventListener("click", () => {
        void store.resample(Number(sizeInput.value), Number(seedInput.value));
    });

    commitButton.addEventListener("click", () => {
        void store.commit();
    });

    retryButton.addEventListener("click", () => {
        void store.retry();
    });

    slider.value = String(store.current.threshold);
    sizeInput.value = String(store.current.sampleSize);
    seedInput.value = String(store.current.sampleSeed);

    void store.loadMeta().then(() => {
        slider.value = String(store.current.threshold);
        return store.resample();
    });
}

if (typeof document !== "undefined") {
    mount();
}
