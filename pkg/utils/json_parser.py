import json
import logging


logger = logging.getLogger(__name__)


def parse_json_object(raw_text: str):
    """
    Safely parse one line of untrusted JSON into a dictionary.

    Agent streams sometimes wrap the object in log noise, so the outermost
    {...} block is extracted first.

    :param raw_text: one input line
    :return: dictionary, or None when the line holds no JSON object
    """

    if not raw_text or not raw_text.strip():
        return None

    try:
        start = raw_text.find("{")
        end = raw_text.rfind("}")

        if start == -1 or end == -1 or end < start:
            return None

        parsed = json.loads(raw_text[start:end + 1])

        if not isinstance(parsed, dict):
            return None

        return parsed

    except ValueError as error:
        logger.debug("JSON parsing failed: %s", error)
        return None
