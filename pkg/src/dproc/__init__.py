import logging


def main() -> None:
    logging.basicConfig(
        level=logging.WARNING, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )

    from dproc.cli import cli

    cli(prog_name="dproc")
