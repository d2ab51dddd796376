/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curve_free: (a: number, b: number) => void;
export const __wbg_profile_free: (a: number, b: number) => void;
export const __wbg_sweep_free: (a: number, b: number) => void;
export const curve_contribution: (a: number, b: number) => [number, number];
export const curve_energies: (a: number) => [number, number];
export const curve_failed: (a: number) => number;
export const curve_l_count: (a: number) => number;
export const curve_total: (a: number) => [number, number];
export const hawkingTemperature: (a: number) => number;
export const localTemperature: (a: number, b: number) => number;
export const modeProfile: (a: number, b: number, c: number, d: number) => [number, number, number];
export const profile_r: (a: number) => [number, number];
export const profile_r_tilde: (a: number) => [number, number];
export const profile_theta0: (a: number) => number;
export const staticRate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const sweep_c: (a: number) => [number, number];
export const sweep_omega: (a: number) => [number, number];
export const sweep_validity: (a: number) => [number, number];
export const wkbSweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
