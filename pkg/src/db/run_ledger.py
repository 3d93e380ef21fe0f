# src/db/run_ledger.py
import os
import sqlite3
import threading
from datetime import datetime

from configs import settings
from src.utils.log_utils import get_logger

logger = get_logger("run_ledger")

COLUMNS = (
    "run_id", "label", "n_witnesses", "n_landmarks", "m",
    "t_ingest", "t_net", "t_weights", "t_witness", "t_analytics",
    "candidates", "slivers", "no_free_weight", "status",
)


class RunLedger:
    """One sqlite ledger per database path, shared by every thread that asks for it."""

    _instances: dict = {}
    _lock = threading.Lock()

    def __new__(cls, db_path: str = settings.LEDGER_DB_PATH, md_path: str | None = None):
        key = os.path.abspath(db_path)
        with cls._lock:
            if key not in cls._instances:
                instance = super().__new__(cls)
                instance._initialized = False
                cls._instances[key] = instance
        return cls._instances[key]

    def __init__(self, db_path: str = settings.LEDGER_DB_PATH, md_path: str | None = None):
        if self._initialized:
            return
        with self._lock:
            if self._initialized:
                return
            self.db_path = db_path
            self.md_path = md_path or (settings.LEDGER_MD_PATH if db_path == settings.LEDGER_DB_PATH
                                       else os.path.splitext(db_path)[0] + "_log.md")
            os.makedirs(os.path.dirname(os.path.abspath(db_path)), exist_ok=True)
            self.conn = sqlite3.connect(db_path, check_same_thread=False)
            self._create_table()
            self._initialized = True

    def _create_table(self):
        cursor = self.conn.cursor()
        cursor.execute('''
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                run_id TEXT NOT NULL UNIQUE,
                label TEXT NOT NULL,
                n_witnesses INTEGER NOT NULL,
                n_landmarks INTEGER NOT NULL,
                m INTEGER NOT NULL,
                t_ingest REAL, t_net REAL, t_weights REAL, t_witness REAL, t_analytics REAL,
                candidates INTEGER, slivers INTEGER, no_free_weight INTEGER,
                status TEXT NOT NULL,
                timestamp DATETIME NOT NULL
            )
        ''')
        self.conn.commit()

    def add_run(self, record: dict):
        row = tuple(record.get(c) for c in COLUMNS)
        with self._lock:
            try:
                timestamp = datetime.now()
                cursor = self.conn.cursor()
                cursor.execute(
                    f"INSERT OR REPLACE INTO runs ({', '.join(COLUMNS)}, timestamp) "
                    f"VALUES ({', '.join('?' * len(COLUMNS))}, ?)",
                    row + (timestamp.isoformat(timespec="seconds"),),
                )
                self.conn.commit()
                logger.info(f"🧠 Run {record.get('run_id')} added to the ledger")
                self._append_to_markdown(record, timestamp)
            except sqlite3.Error as e:
                logger.error(f"🔴 Error adding run to the ledger: {e}")

    def _append_to_markdown(self, record: dict, timestamp: datetime):
        with open(self.md_path, "a", encoding="utf-8") as f:
            f.write("\n---\n\n")
            f.write(f"**🗓️ Timestamp:** {timestamp.strftime('%Y-%m-%d %H:%M:%S')}\n\n")
            f.write(f"**Run:** `{record.get('run_id')}` ({record.get('label')}, status {record.get('status')})\n\n")
            f.write(f"- #W = {record.get('n_witnesses')}, #L = {record.get('n_landmarks')}, m = {record.get('m')}\n")
            f.write(f"- candidates = {record.get('candidates')}, slivers = {record.get('slivers')}\n")
            f.write(f"- weights {record.get('t_weights') or 0.0:.3f}s, witness {record.get('t_witness') or 0.0:.3f}s\n")

    def runs(self, label: str | None = None) -> list:
        with self._lock:
            cursor = self.conn.cursor()
            query = f"SELECT {', '.join(COLUMNS)} FROM runs"
            args: tuple = ()
            if label is not None:
                query += " WHERE label = ?"
                args = (label,)
            cursor.execute(query + " ORDER BY id", args)
            return [dict(zip(COLUMNS, row)) for row in cursor.fetchall()]
