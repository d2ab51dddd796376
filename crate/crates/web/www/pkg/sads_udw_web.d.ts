/* tslint:disable */
/* eslint-disable */

export class Curve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Contribution of one `l`; empty past the last computed `l`.
     */
    contribution(l: number): Float64Array;
    energies(): Float64Array;
    total(): Float64Array;
    readonly failed: number;
    readonly l_count: number;
}

export class Profile {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    r(): Float64Array;
    /**
     * `r R(r)`, the Schroedinger-form amplitude.
     */
    r_tilde(): Float64Array;
    readonly theta0: number;
}

export class Sweep {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Peak coefficient `C`; NaN below the barrier.
     */
    c(): Float64Array;
    omega(): Float64Array;
    validity(): Float64Array;
}

export function hawkingTemperature(r_plus: number): number;

export function localTemperature(r_plus: number, radius: number): number;

export function modeProfile(r_plus: number, omega: number, l: number, points: number): Profile;

export function staticRate(r_plus: number, radius: number, boulware: boolean, l_max: number, e_min: number, e_max: number, count: number): Curve;

export function wkbSweep(r_plus: number, l: number, omega_min: number, omega_max: number, count: number): Sweep;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curve_free: (a: number, b: number) => void;
    readonly __wbg_profile_free: (a: number, b: number) => void;
    readonly __wbg_sweep_free: (a: number, b: number) => void;
    readonly curve_contribution: (a: number, b: number) => [number, number];
    readonly curve_energies: (a: number) => [number, number];
    readonly curve_failed: (a: number) => number;
    readonly curve_l_count: (a: number) => number;
    readonly curve_total: (a: number) => [number, number];
    readonly hawkingTemperature: (a: number) => number;
    readonly localTemperature: (a: number, b: number) => number;
    readonly modeProfile: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly profile_r: (a: number) => [number, number];
    readonly profile_r_tilde: (a: number) => [number, number];
    readonly profile_theta0: (a: number) => number;
    readonly staticRate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly sweep_c: (a: number) => [number, number];
    readonly sweep_omega: (a: number) => [number, number];
    readonly sweep_validity: (a: number) => [number, number];
    readonly wkbSweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
