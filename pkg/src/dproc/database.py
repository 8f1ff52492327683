import hashlib
import logging
from typing import Optional

from sqlalchemy import JSON, Boolean, Column, DateTime, Integer, String, delete, func, select
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import declarative_base

from dproc.data_objects import DeclarativeProcess, canonicalize, make_process
from dproc.dsl import format_process
from dproc.enumeration_base import EnumerationResult, LeafStep

LOG = logging.getLogger(__name__)

Base = declarative_base()


class EnumerationRecord(Base):
    __tablename__ = "enumerations"

    id = Column(Integer, primary_key=True, autoincrement=True)
    fingerprint = Column(String, unique=True, nullable=False, index=True)
    strategy = Column(String, nullable=False)
    pruned = Column(Boolean, default=False, nullable=False)
    satisfies_calls = Column(Integer, nullable=False)
    trace_count = Column(Integer, nullable=False)
    traces = Column(JSON, nullable=False)
    peel_sequence = Column(JSON, nullable=False, default=list)
    updated_at = Column(DateTime(timezone=True), server_default=func.now(), onupdate=func.now())


def process_fingerprint(process: DeclarativeProcess, strategy: str, pruned: bool = False) -> str:
    """Key for a cached result; names and labels do not change the traces."""
    bare = make_process(process.activity_ids, process.constraints)
    text = f"{format_process(bare)}strategy={strategy}\npruned={pruned}\n"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class TraceCache:
    def __init__(self, db_path: str = "traces.db"):
        self.db_path = db_path
        self.engine = create_async_engine(f"sqlite+aiosqlite:///{db_path}")
        self.async_session = async_sessionmaker(
            self.engine, class_=AsyncSession, expire_on_commit=False
        )
        self._initialized = False

    async def ainit_database(self):
        """Create the enumerations table if it doesn't exist."""
        if self._initialized:
            return

        try:
            async with self.engine.begin() as conn:
                await conn.run_sync(Base.metadata.create_all)
            self._initialized = True
            LOG.info("Trace cache initialized at %s", self.db_path)
        except Exception as e:
            LOG.error("Error initializing trace cache: %s", e)
            raise

    async def asave_result(self, fingerprint: str, result: EnumerationResult) -> None:
        """Insert or replace the result stored under ``fingerprint``."""
        await self.ainit_database()
        values = dict(
            strategy=result.strategy,
            pruned=result.pruned,
            satisfies_calls=result.satisfies_calls,
            trace_count=result.trace_count,
            traces=[list(t) for t in result.traces.traces],
            peel_sequence=[step.model_dump(mode="json") for step in result.peel_sequence],
        )
        try:
            async with self.async_session() as session:
                stmt = select(EnumerationRecord).where(
                    EnumerationRecord.fingerprint == fingerprint
                )
                row = (await session.execute(stmt)).scalars().first()
                if row is None:
                    session.add(EnumerationRecord(fingerprint=fingerprint, **values))
                else:
                    for key, value in values.items():
                        setattr(row, key, value)
                await session.commit()
            LOG.info("Cached %d traces under %s", result.trace_count, fingerprint[:12])
        except Exception as e:
            LOG.error("Error saving enumeration result: %s", e)
            raise

    async def aload_result(self, fingerprint: str) -> Optional[EnumerationResult]:
        await self.ainit_database()
        try:
            async with self.async_session() as session:
                stmt = select(EnumerationRecord).where(
                    EnumerationRecord.fingerprint == fingerprint
                )
                row = (await session.execute(stmt)).scalars().first()
        except Exception as e:
            LOG.error("Error loading enumeration result: %s", e)
            raise

        if row is None:
            LOG.info("Trace cache miss for %s", fingerprint[:12])
            return None
        LOG.info("Trace cache hit for %s (%d traces)", fingerprint[:12], row.trace_count)
        return EnumerationResult(
            traces=canonicalize(tuple(t) for t in row.traces),
            satisfies_calls=row.satisfies_calls,
            strategy=row.strategy,
            peel_sequence=tuple(LeafStep.model_validate(s) for s in row.peel_sequence),
            pruned=row.pruned,
        )

    async def adelete(self, fingerprint: str) -> bool:
        await self.ainit_database()
        try:
            async with self.async_session() as session:
                result = await session.execute(
                    delete(EnumerationRecord).where(EnumerationRecord.fingerprint == fingerprint)
                )
                await session.commit()
                return result.rowcount > 0
        except Exception as e:
            LOG.error("Error deleting enumeration result: %s", e)
            raise

    async def aclear_all(self):
        """Delete every cached result."""
        await self.ainit_database()

        try:
            async with self.async_session() as session:
                result = await session.execute(delete(EnumerationRecord))
                await session.commit()
                LOG.info("Deleted all %d cached results", result.rowcount)
        except Exception as e:
            LOG.error("Error clearing trace cache: %s", e)
            raise

    async def aclose(self):
        """Close the database connection."""
        await self.engine.dispose()
        LOG.info("Trace cache connection closed")
