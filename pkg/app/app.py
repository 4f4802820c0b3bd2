"""
Synthlock - Results Viewer

Streamlit front end for browsing synthesis runs: the synthesized process
LTSs, the emitted program, the search log and the benchmark table.
"""

import os
import sys

import pandas as pd
import streamlit as st

# Add the project root to the import path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from constants import RESULTS_DIR, RUNS_DIR
from src.data.loading import list_runs, load_results, load_run, reverify_run
from src.lts.core import Lts
from src.visualization.lts_graph import create_lts_graph
from src.visualization.timeline import create_schedule_comparison, create_search_timeline

st.set_page_config(
    page_title="Synthlock - Synthesis Results",
    page_icon="🔒",
    layout="wide",
    initial_sidebar_state="expanded",
)

st.title("Synthlock - Synthesis Results")
st.markdown("""
    Browse the processes synthesized from lock-synchronized specifications,
    the guarded-command programs emitted for them, and how each search went.
""")

st.sidebar.title("Navigation")
page = st.sidebar.radio(
    "Select a page:",
    ["Overview", "Processes", "Program", "Search Log", "Benchmarks"],
)

st.sidebar.title("Data")
runs_root = st.sidebar.text_input("Runs directory:", RUNS_DIR)
results_path = st.sidebar.text_input("Results CSV:", os.path.join(RESULTS_DIR, "results.csv"))


@st.cache_data
def available_runs(root):
    """List and cache the run directories"""
    try:
        return list_runs(root)
    except FileNotFoundError as e:
        st.sidebar.warning(str(e))
        return []


def load_selected(run_dir):
    try:
        return load_run(run_dir)
    except FileNotFoundError as e:
        st.error(f"Error loading run: {e}")
        return None


runs = available_runs(runs_root)
selected = None
if runs:
    selected = st.sidebar.selectbox("Select run:", runs, format_func=os.path.basename)
elif page != "Benchmarks":
    st.info("No runs found. Run `python synth.py data/specs/mutex.dspec` first.")

run = load_selected(selected) if selected else None

if page == "Overview" and run is not None:
    result = run["result"]
    row = result.get("row", {})
    summary = result.get("summary", {})

    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Result", row.get("result", "?"))
    with col2:
        st.metric("Iterations", row.get("iterations", 0))
    with col3:
        st.metric("Total time (s)", f"{row.get('g_time', 0.0):.3f}")
    with col4:
        st.metric("Counterexamples", summary.get("cex_count", 0))

    st.subheader("Property")
    st.code(result.get("property", ""), language=None)

    st.subheader("Statistics")
    st.dataframe(pd.DataFrame([row]), use_container_width=True)

    if row.get("result") == "F" and st.button("Re-verify from disk"):
        with st.spinner("Checking stored processes..."):
            try:
                ok = reverify_run(run["directory"])
            except FileNotFoundError as e:
                st.error(str(e))
            else:
                if ok:
                    st.success("Stored solution satisfies its specifications and the property.")
                else:
                    st.error("Stored solution fails re-verification.")

elif page == "Processes" and run is not None:
    processes = run["processes"]
    names = run["result"].get("processes", [])
    if not processes:
        st.warning("This run has no solution.")
    else:
        index = st.selectbox(
            "Process:",
            list(range(len(processes))),
            format_func=lambda i: names[i] if i < len(names) else f"P{i}",
        )
        lts: Lts = processes[index]
        st.plotly_chart(create_lts_graph(lts, title=names[index] if index < len(names) else "Process"),
                        use_container_width=True)

        st.subheader("States")
        st.dataframe(pd.DataFrame([
            {
                "state": lts.state_name(s),
                "initial": s in lts.initials,
                "label": ", ".join(sorted(lts.label(s))),
            }
            for s in lts.states
        ]), use_container_width=True)

        st.subheader("Transitions")
        st.dataframe(pd.DataFrame(
            [(lts.state_name(s), a, lts.state_name(t)) for (s, a, t) in lts.transitions],
            columns=["source", "action", "target"],
        ), use_container_width=True)

elif page == "Program" and run is not None:
    if run["program_text"]:
        st.code(run["program_text"], language=None)
    elif run["program"] is not None:
        st.json(run["result"].get("files", {}))
        st.write("Program stored as JSON only.")
    else:
        st.warning("No program was emitted for this run.")

elif page == "Search Log" and run is not None:
    log_df = run["log"]
    st.plotly_chart(create_search_timeline(log_df), use_container_width=True)

    verdicts = st.multiselect("Show verdicts:", ["holds", "fails", "skipped"], default=["holds", "fails"])
    if "verdict" in log_df.columns and len(log_df) > 0:
        log_df = log_df[log_df["verdict"].isin(verdicts)]
    st.dataframe(log_df, use_container_width=True)

elif page == "Benchmarks":
    results_df = load_results(results_path)
    if len(results_df) == 0:
        st.info("No benchmark results yet. Run `python synth.py --suite` to produce them.")
    else:
        metric = st.selectbox("Metric:", ["iterations", "g_time", "l_time", "reachable_states"])
        st.plotly_chart(create_schedule_comparison(results_df, metric), use_container_width=True)
        st.dataframe(results_df, use_container_width=True)

        st.download_button(
            label="Download CSV",
            data=results_df.to_csv(index=False, float_format="%.3f").encode("utf-8"),
            file_name="results.csv",
            mime="text/csv",
        )
